#include "boxvote/weaklabel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "boxvote/rng.hpp"

namespace boxvote {

namespace {

struct CellKey {
    int x, y, z;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t v : {static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.x)),
                                static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.y)),
                                static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.z))}) {
            h ^= v;
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Bins every box into all grid cells its extent overlaps, so the candidate
// boxes for a point are exactly the boxes binned into the point's cell.
struct BoxGrid {
    double cell = 1.0;
    std::unordered_map<CellKey, std::vector<int>, CellKeyHash> bins;

    explicit BoxGrid(const std::vector<Aabb>& boxes) {
        for (const Aabb& b : boxes)
            for (int c = 0; c < 3; ++c) cell = std::max(cell, b.size[c]);
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const Vec3 lo = boxes[i].min_corner();
            const Vec3 hi = boxes[i].max_corner();
            const int x0 = static_cast<int>(std::floor(lo.x / cell));
            const int x1 = static_cast<int>(std::floor(hi.x / cell));
            const int y0 = static_cast<int>(std::floor(lo.y / cell));
            const int y1 = static_cast<int>(std::floor(hi.y / cell));
            const int z0 = static_cast<int>(std::floor(lo.z / cell));
            const int z1 = static_cast<int>(std::floor(hi.z / cell));
            for (int x = x0; x <= x1; ++x)
                for (int y = y0; y <= y1; ++y)
                    for (int z = z0; z <= z1; ++z)
                        bins[{x, y, z}].push_back(static_cast<int>(i));
        }
    }

    const std::vector<int>* candidates(const Vec3& p) const {
        const CellKey key{static_cast<int>(std::floor(p.x / cell)),
                          static_cast<int>(std::floor(p.y / cell)),
                          static_cast<int>(std::floor(p.z / cell))};
        auto it = bins.find(key);
        return it == bins.end() ? nullptr : &it->second;
    }
};

}  // namespace

Association associate(const SceneCloud& scene, const BoxAnnotationSet& set,
                      AssocStrategy strategy) {
    Association assoc;
    assoc.tag.assign(scene.size(), Association::kBackground);
    if (set.empty()) return assoc;

    std::vector<double> vol(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) vol[i] = volume(set.boxes[i]);

    const BoxGrid grid(set.boxes);
    std::vector<int> hits;
    for (std::size_t p = 0; p < scene.size(); ++p) {
        const Vec3& pos = scene.positions[p];
        const std::vector<int>* cand = grid.candidates(pos);
        if (!cand) continue;
        hits.clear();
        for (int b : *cand)
            if (contains(set.boxes[b], pos)) hits.push_back(b);
        if (hits.empty()) continue;
        if (hits.size() == 1) {
            assoc.tag[p] = hits[0];
            continue;
        }
        switch (strategy) {
            case AssocStrategy::DecidedOnly:
                assoc.tag[p] = Association::kUndecided;
                break;
            case AssocStrategy::ClosestBox: {
                int best = hits[0];
                double best_d2 = (set.boxes[best].center - pos).squared_norm();
                for (std::size_t k = 1; k < hits.size(); ++k) {
                    const int b = hits[k];
                    const double d2 = (set.boxes[b].center - pos).squared_norm();
                    if (d2 < best_d2 || (d2 == best_d2 && vol[b] < vol[best])) {
                        best = b;
                        best_d2 = d2;
                    }
                }
                assoc.tag[p] = best;
                break;
            }
            case AssocStrategy::SmallestBox: {
                int best = hits[0];
                double best_d2 = (set.boxes[best].center - pos).squared_norm();
                for (std::size_t k = 1; k < hits.size(); ++k) {
                    const int b = hits[k];
                    const double d2 = (set.boxes[b].center - pos).squared_norm();
                    if (vol[b] < vol[best] || (vol[b] == vol[best] && d2 < best_d2)) {
                        best = b;
                        best_d2 = d2;
                    }
                }
                assoc.tag[p] = best;
                break;
            }
        }
    }
    return assoc;
}

TrainingTargets make_targets(const Association& assoc, const SceneCloud& scene,
                             const BoxAnnotationSet& set) {
    if (assoc.size() != scene.size())
        throw std::invalid_argument("make_targets: association does not match the scene");
    const int bg = scene.background_class();
    TrainingTargets t;
    t.offset.assign(scene.size(), Vec3{0, 0, 0});
    t.size.assign(scene.size(), Vec3{0, 0, 0});
    t.sem.assign(scene.size(), -1);
    for (std::size_t p = 0; p < scene.size(); ++p) {
        const int tag = assoc.tag[p];
        if (tag == Association::kUndecided) continue;
        if (tag == Association::kBackground) {
            t.sem[p] = bg;
            continue;
        }
        if (static_cast<std::size_t>(tag) >= set.size())
            throw std::invalid_argument("make_targets: association references box " +
                                        std::to_string(tag) + " outside the set");
        const Aabb& b = set.boxes[tag];
        t.offset[p] = b.center - scene.positions[p];
        t.size[p] = b.size;
        t.sem[p] = b.label;
    }
    return t;
}

double undecided_fraction(const Association& assoc) {
    if (assoc.tag.empty()) return 0.0;
    std::size_t n = 0;
    for (int tag : assoc.tag)
        if (tag == Association::kUndecided) ++n;
    return static_cast<double>(n) / static_cast<double>(assoc.tag.size());
}

std::vector<InstanceMask> labels_to_masks(const Association& assoc,
                                          const BoxAnnotationSet& set) {
    std::vector<std::vector<int>> points(set.size());
    for (std::size_t p = 0; p < assoc.size(); ++p)
        if (assoc.tag[p] >= 0) points[assoc.tag[p]].push_back(static_cast<int>(p));
    std::vector<InstanceMask> masks;
    for (std::size_t b = 0; b < set.size(); ++b) {
        if (points[b].empty()) continue;
        InstanceMask m;
        m.points = std::move(points[b]);
        m.label = set.boxes[b].label;
        m.score = 1.0;
        masks.push_back(std::move(m));
    }
    return masks;
}

BoxAnnotationSet degrade_annotations(const BoxAnnotationSet& set, double drop_rate,
                                     double corner_jitter_max, std::uint64_t seed) {
    if (drop_rate < 0.0 || drop_rate > 1.0)
        throw std::invalid_argument("degrade_annotations: drop_rate must be in [0, 1]");
    if (corner_jitter_max < 0.0)
        throw std::invalid_argument("degrade_annotations: corner_jitter_max must be >= 0");

    Rng rng(seed);
    std::vector<bool> dropped(set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        dropped[i] = rng.uniform01() < drop_rate;

    BoxAnnotationSet out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        Vec3 lo = set.boxes[i].min_corner();
        Vec3 hi = set.boxes[i].max_corner();
        for (int c = 0; c < 3; ++c)
            lo[c] += rng.uniform(-corner_jitter_max, corner_jitter_max);
        for (int c = 0; c < 3; ++c)
            hi[c] += rng.uniform(-corner_jitter_max, corner_jitter_max);
        if (dropped[i]) continue;
        Aabb b;
        b.label = set.boxes[i].label;
        for (int c = 0; c < 3; ++c) {
            double a = std::min(lo[c], hi[c]);
            double z = std::max(lo[c], hi[c]);
            if (z - a < kMinBoxExtent) {
                const double mid = 0.5 * (a + z);
                a = mid - 0.5 * kMinBoxExtent;
                z = mid + 0.5 * kMinBoxExtent;
            }
            b.center[c] = 0.5 * (a + z);
            b.size[c] = z - a;
        }
        out.boxes.push_back(b);
    }
    return out;
}

}  // namespace boxvote
