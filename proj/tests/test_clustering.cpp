#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "boxvote/clustering.hpp"
#include "boxvote/rng.hpp"
#include "helpers.hpp"

using namespace boxvote;
using testutil::box;
using testutil::unit_cube;
using testutil::vote;

namespace {

VoteSet singleton_expansions(std::vector<Vote> votes) {
    VoteSet vs;
    vs.votes = std::move(votes);
    for (std::size_t i = 0; i < vs.votes.size(); ++i)
        vs.expansion.push_back({static_cast<int>(i)});
    return vs;
}

VoteSet random_votes(Rng& rng, int m, double room = 3.0) {
    std::vector<Vote> votes;
    for (int i = 0; i < m; ++i)
        votes.push_back(vote(box(rng.uniform(0, room), rng.uniform(0, room),
                                 rng.uniform(0, room), rng.uniform(0.3, 1.5),
                                 rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5),
                                 1 + static_cast<int>(rng.uniform_index(3))),
                             rng.uniform(0.01, 0.99),
                             1 + static_cast<int>(rng.uniform_index(3))));
    return singleton_expansions(std::move(votes));
}

bool same_clustering(const Clustering& a, const Clustering& b) {
    if (a.clusters.size() != b.clusters.size()) return false;
    for (std::size_t i = 0; i < a.clusters.size(); ++i) {
        if (a.clusters[i].representative != b.clusters[i].representative)
            return false;
        if (a.clusters[i].members != b.clusters[i].members) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("a single vote clusters with itself") {
    const VoteSet vs = singleton_expansions({vote(unit_cube(0), 0.5, 1)});
    const Clustering c = nmc(vs, 0.3);
    REQUIRE(c.size() == 1);
    CHECK(c.clusters[0].representative == 0);
    CHECK(c.clusters[0].members == std::vector<int>{0});
}

TEST_CASE("identical boxes merge under the higher score") {
    const VoteSet vs = singleton_expansions(
        {vote(unit_cube(0), 0.8, 1), vote(unit_cube(0), 0.9, 1)});
    const Clustering c = nmc(vs, 0.3);
    REQUIRE(c.size() == 1);
    CHECK(c.clusters[0].representative == 1);
    CHECK(c.clusters[0].members == std::vector<int>{0, 1});
}

TEST_CASE("greedy chains do not close transitively") {
    // Colinear unit cubes at 0, 1/3 and 2/3: IoU(A,B) = IoU(B,C) = 0.5,
    // IoU(A,C) = 0.2. A absorbs B; C stays alone.
    const VoteSet vs = singleton_expansions({vote(unit_cube(0.0), 0.9, 1),
                                             vote(unit_cube(1.0 / 3), 0.8, 1),
                                             vote(unit_cube(2.0 / 3), 0.7, 1)});
    CHECK(iou_aabb(vs.votes[0].box, vs.votes[1].box) == doctest::Approx(0.5));
    CHECK(iou_aabb(vs.votes[1].box, vs.votes[2].box) == doctest::Approx(0.5));
    CHECK(iou_aabb(vs.votes[0].box, vs.votes[2].box) == doctest::Approx(0.2));
    const Clustering c = nmc(vs, 0.3);
    REQUIRE(c.size() == 2);
    CHECK(c.clusters[0].representative == 0);
    CHECK(c.clusters[0].members == std::vector<int>{0, 1});
    CHECK(c.clusters[1].representative == 2);
    CHECK(c.clusters[1].members == std::vector<int>{2});
}

TEST_CASE("absorption is strictly above the threshold") {
    // Half-width box nested in a unit cube: IoU is exactly 0.5 in doubles.
    const VoteSet vs = singleton_expansions(
        {vote(box(0, 0, 0, 1, 1, 1, 1), 0.9, 1),
         vote(box(0, 0, 0, 0.5, 1, 1, 1), 0.8, 1)});
    CHECK(iou_aabb(vs.votes[0].box, vs.votes[1].box) == 0.5);
    // tau = 0.5 must NOT absorb; anything strictly below does.
    CHECK(nmc(vs, 0.5).size() == 2);
    CHECK(nmc(vs, 0.49).size() == 1);
}

TEST_CASE("equal scores break ties by the lower index") {
    const VoteSet vs = singleton_expansions(
        {vote(unit_cube(0), 0.7, 1), vote(unit_cube(0), 0.7, 1)});
    const Clustering c = nmc(vs, 0.3);
    REQUIRE(c.size() == 1);
    CHECK(c.clusters[0].representative == 0);
}

TEST_CASE("tau outside its open interval is rejected") {
    const VoteSet vs = singleton_expansions({vote(unit_cube(0), 0.5, 1)});
    CHECK_THROWS_AS(nmc(vs, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(nmc(vs, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(nmc(vs, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(nmc(vs, -0.1), std::invalid_argument);
}

TEST_CASE("empty vote sets produce empty clusterings") {
    CHECK(nmc(VoteSet{}, 0.3).size() == 0);
    CHECK(spatial_cluster(VoteSet{}, 0.1).size() == 0);
}

TEST_CASE("nmc output satisfies the partition and threshold contracts") {
    Rng rng(100);
    for (int trial = 0; trial < 30; ++trial) {
        const VoteSet vs = random_votes(rng, 40);
        const double tau = rng.uniform(0.05, 0.9);
        const Clustering c = nmc(vs, tau);
        CHECK_NOTHROW(c.validate(vs.size()));
        for (const Cluster& cl : c.clusters)
            for (int m : cl.members)
                if (m != cl.representative)
                    CHECK(iou_aabb(vs.votes[cl.representative].box,
                                   vs.votes[m].box) > tau);
        // No representative could absorb an earlier one.
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                CHECK(iou_aabb(vs.votes[c.clusters[i].representative].box,
                               vs.votes[c.clusters[j].representative].box) <= tau);
    }
}

TEST_CASE("near-one tau with distinct boxes keeps every vote separate") {
    Rng rng(101);
    const VoteSet vs = random_votes(rng, 30);
    CHECK(nmc(vs, 0.999).size() == vs.size());
    CHECK(nmc(vs, 0.999).size() >= nmc(vs, 0.001).size());
}

TEST_CASE("clustering ignores input order up to index renaming") {
    Rng rng(102);
    const VoteSet vs = random_votes(rng, 25);
    std::vector<int> perm(vs.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

    VoteSet shuffled;
    shuffled.votes.resize(vs.size());
    shuffled.expansion.resize(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) {
        shuffled.votes[perm[i]] = vs.votes[i];
        shuffled.expansion[perm[i]] = vs.expansion[i];
    }

    const Clustering base = nmc(vs, 0.3);
    Clustering moved = nmc(shuffled, 0.3);
    // Rename shuffled indices back to the originals and renormalize.
    std::vector<int> inverse(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        inverse[perm[i]] = static_cast<int>(i);
    for (Cluster& cl : moved.clusters) {
        cl.representative = inverse[cl.representative];
        for (int& m : cl.members) m = inverse[m];
        std::sort(cl.members.begin(), cl.members.end());
    }
    std::sort(moved.clusters.begin(), moved.clusters.end(),
              [](const Cluster& a, const Cluster& b) {
                  return a.representative < b.representative;
              });
    Clustering base_sorted = base;
    std::sort(base_sorted.clusters.begin(), base_sorted.clusters.end(),
              [](const Cluster& a, const Cluster& b) {
                  return a.representative < b.representative;
              });
    CHECK(same_clustering(base_sorted, moved));
}

TEST_CASE("grid acceleration reproduces the naive path") {
    Rng rng(103);
    for (int trial = 0; trial < 50; ++trial) {
        const VoteSet vs = random_votes(rng, 64);
        const double tau = rng.uniform(0.05, 0.9);
        CHECK(same_clustering(nmc(vs, tau, NmcMode::Naive),
                              nmc(vs, tau, NmcMode::Grid)));
    }
}

TEST_CASE("spatial clustering separates distant centers") {
    const VoteSet vs = singleton_expansions(
        {vote(unit_cube(0), 0.5, 1), vote(unit_cube(10), 0.6, 1)});
    const Clustering c = spatial_cluster(vs, 0.1);
    CHECK(c.size() == 2);
    // Ordered by representative score.
    CHECK(c.clusters[0].representative == 1);
}

TEST_CASE("spatial clustering is transitive along chains") {
    const VoteSet vs = singleton_expansions({vote(unit_cube(0.00), 0.5, 1),
                                             vote(unit_cube(0.05), 0.9, 1),
                                             vote(unit_cube(0.10), 0.6, 1)});
    const Clustering c = spatial_cluster(vs, 0.06);
    REQUIRE(c.size() == 1);
    CHECK(c.clusters[0].representative == 1);  // highest score in the component
    CHECK(c.clusters[0].members == std::vector<int>{0, 1, 2});

    CHECK(spatial_cluster(vs, 0.04).size() == 3);
}

TEST_CASE("spatial clustering radius is inclusive") {
    const VoteSet vs = singleton_expansions(
        {vote(unit_cube(0), 0.5, 1), vote(unit_cube(0.1), 0.6, 1)});
    CHECK(spatial_cluster(vs, 0.1).size() == 1);
    CHECK_THROWS_AS(spatial_cluster(vs, 0.0), std::invalid_argument);
}

TEST_CASE("per-class clustering never mixes classes") {
    VoteSet vs = singleton_expansions(
        {vote(unit_cube(0, 0, 0, 1), 0.9, 1), vote(unit_cube(0, 0, 0, 2), 0.8, 2)});
    const auto inner = [](const VoteSet& v) { return nmc(v, 0.3); };
    const Clustering c = cluster_per_semantic(vs, inner);
    CHECK(c.size() == 2);  // identical boxes, still separated by class

    Rng rng(104);
    const VoteSet mixed = random_votes(rng, 40);
    const Clustering per_class = cluster_per_semantic(mixed, inner);
    CHECK_NOTHROW(per_class.validate(mixed.size()));
    std::size_t expected = 0;
    for (int cls = 1; cls <= 3; ++cls) {
        VoteSet sub;
        std::vector<int> original;
        for (std::size_t i = 0; i < mixed.size(); ++i)
            if (mixed.votes[i].semantic == cls) {
                sub.votes.push_back(mixed.votes[i]);
                sub.expansion.push_back(mixed.expansion[i]);
                original.push_back(static_cast<int>(i));
            }
        expected += nmc(sub, 0.3).size();
    }
    CHECK(per_class.size() == expected);
    for (const Cluster& cl : per_class.clusters) {
        const int cls = mixed.votes[cl.representative].semantic;
        for (int m : cl.members) CHECK(mixed.votes[m].semantic == cls);
    }

    // All one class: identical to the inner operator.
    VoteSet mono = mixed;
    for (Vote& v : mono.votes) v.semantic = 2;
    CHECK(same_clustering(cluster_per_semantic(mono, inner), nmc(mono, 0.3)));
}

TEST_CASE("clustering json round trip") {
    const auto dir = testutil::temp_dir();
    Rng rng(105);
    const VoteSet vs = random_votes(rng, 12);
    const Clustering c = nmc(vs, 0.3);
    const std::string path = (dir / "clusters.json").string();
    save_clustering_json(path, c);
    const Clustering loaded = load_clustering_json(path);
    CHECK(same_clustering(c, loaded));
}
