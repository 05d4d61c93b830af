#include "boxvote/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace boxvote {

using nlohmann::json;

void Clustering::validate(std::size_t n_votes) const {
    std::vector<bool> seen(n_votes, false);
    std::size_t total = 0;
    for (const Cluster& c : clusters) {
        if (c.members.empty())
            throw std::runtime_error("clustering: empty cluster");
        if (!std::is_sorted(c.members.begin(), c.members.end()))
            throw std::runtime_error("clustering: members must be sorted");
        bool has_rep = false;
        for (int m : c.members) {
            if (m < 0 || static_cast<std::size_t>(m) >= n_votes)
                throw std::runtime_error("clustering: member index out of range");
            if (seen[m])
                throw std::runtime_error("clustering: vote " + std::to_string(m) +
                                         " in two clusters");
            seen[m] = true;
            if (m == c.representative) has_rep = true;
            ++total;
        }
        if (!has_rep)
            throw std::runtime_error("clustering: representative not among members");
    }
    if (total != n_votes)
        throw std::runtime_error("clustering: " + std::to_string(total) +
                                 " members for " + std::to_string(n_votes) + " votes");
}

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

CellKey cell_of(const Vec3& p, double cell) {
    return {static_cast<int>(std::floor(p.x / cell)),
            static_cast<int>(std::floor(p.y / cell)),
            static_cast<int>(std::floor(p.z / cell))};
}

std::vector<int> score_order(const VoteSet& votes) {
    std::vector<int> order(votes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (votes.votes[a].score != votes.votes[b].score)
            return votes.votes[a].score > votes.votes[b].score;
        return a < b;
    });
    return order;
}

Clustering nmc_naive(const VoteSet& votes, double tau) {
    const std::vector<int> order = score_order(votes);
    std::vector<bool> clustered(votes.size(), false);
    Clustering out;
    for (int rep : order) {
        if (clustered[rep]) continue;
        Cluster c;
        c.representative = rep;
        clustered[rep] = true;
        for (std::size_t j = 0; j < votes.size(); ++j) {
            if (clustered[j]) continue;
            if (iou_aabb(votes.votes[rep].box, votes.votes[j].box) > tau)
                clustered[j] = true, c.members.push_back(static_cast<int>(j));
        }
        c.members.push_back(rep);
        std::sort(c.members.begin(), c.members.end());
        out.clusters.push_back(std::move(c));
    }
    return out;
}

Clustering nmc_grid(const VoteSet& votes, double tau) {
    // Cell = the largest box diagonal, so boxes with positive IoU always sit
    // in the same or adjacent cells.
    double cell = kMinBoxExtent;
    for (const Vote& v : votes.votes) cell = std::max(cell, v.box.size.norm());
    std::unordered_map<CellKey, std::vector<int>, CellKeyHash> bins;
    for (std::size_t i = 0; i < votes.size(); ++i)
        bins[cell_of(votes.votes[i].box.center, cell)].push_back(static_cast<int>(i));

    const std::vector<int> order = score_order(votes);
    std::vector<bool> clustered(votes.size(), false);
    Clustering out;
    for (int rep : order) {
        if (clustered[rep]) continue;
        Cluster c;
        c.representative = rep;
        clustered[rep] = true;
        const CellKey base = cell_of(votes.votes[rep].box.center, cell);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = bins.find({base.x + dx, base.y + dy, base.z + dz});
                    if (it == bins.end()) continue;
                    std::vector<int>& bin = it->second;
                    std::size_t w = 0;
                    for (std::size_t k = 0; k < bin.size(); ++k) {
                        const int j = bin[k];
                        if (!clustered[j] &&
                            iou_aabb(votes.votes[rep].box, votes.votes[j].box) > tau) {
                            clustered[j] = true;
                            c.members.push_back(j);
                        } else if (j != rep && !clustered[j]) {
                            bin[w++] = j;  // compact away absorbed votes
                        }
                    }
                    bin.resize(w);
                }
        c.members.push_back(rep);
        std::sort(c.members.begin(), c.members.end());
        out.clusters.push_back(std::move(c));
    }
    return out;
}

}  // namespace

Clustering nmc(const VoteSet& votes, double tau, NmcMode mode) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("nmc: tau must be in (0, 1)");
    if (mode == NmcMode::Auto)
        mode = votes.size() >= 512 ? NmcMode::Grid : NmcMode::Naive;
    return mode == NmcMode::Grid ? nmc_grid(votes, tau) : nmc_naive(votes, tau);
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

Clustering spatial_cluster(const VoteSet& votes, double radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("spatial_cluster: radius must be positive");
    const double r2 = radius * radius;
    std::unordered_map<CellKey, std::vector<int>, CellKeyHash> bins;
    for (std::size_t i = 0; i < votes.size(); ++i)
        bins[cell_of(votes.votes[i].box.center, radius)].push_back(static_cast<int>(i));

    UnionFind uf(votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) {
        const CellKey base = cell_of(votes.votes[i].box.center, radius);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = bins.find({base.x + dx, base.y + dy, base.z + dz});
                    if (it == bins.end()) continue;
                    for (int j : it->second) {
                        if (j <= static_cast<int>(i)) continue;
                        const Vec3 d = votes.votes[i].box.center - votes.votes[j].box.center;
                        if (d.squared_norm() <= r2) uf.unite(static_cast<int>(i), j);
                    }
                }
    }

    std::map<int, std::vector<int>> comps;  // root -> members (ascending)
    for (std::size_t i = 0; i < votes.size(); ++i)
        comps[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));

    Clustering out;
    for (auto& [root, members] : comps) {
        (void)root;
        Cluster c;
        c.members = std::move(members);
        c.representative = c.members[0];
        for (int m : c.members)
            if (votes.votes[m].score > votes.votes[c.representative].score)
                c.representative = m;
        out.clusters.push_back(std::move(c));
    }
    // order clusters like the greedy path: by descending representative score
    std::stable_sort(out.clusters.begin(), out.clusters.end(),
                     [&](const Cluster& a, const Cluster& b) {
                         const double sa = votes.votes[a.representative].score;
                         const double sb = votes.votes[b.representative].score;
                         if (sa != sb) return sa > sb;
                         return a.representative < b.representative;
                     });
    return out;
}

Clustering cluster_per_semantic(
    const VoteSet& votes,
    const std::function<Clustering(const VoteSet&)>& inner) {
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < votes.size(); ++i)
        by_class[votes.votes[i].semantic].push_back(static_cast<int>(i));

    Clustering out;
    for (const auto& [cls, idx] : by_class) {
        (void)cls;
        VoteSet sub;
        sub.votes.reserve(idx.size());
        sub.expansion.reserve(idx.size());
        for (int i : idx) {
            sub.votes.push_back(votes.votes[i]);
            sub.expansion.push_back(votes.expansion[i]);
        }
        Clustering part = inner(sub);
        part.validate(sub.size());
        for (Cluster& c : part.clusters) {
            Cluster mapped;
            mapped.representative = idx[c.representative];
            mapped.members.reserve(c.members.size());
            for (int m : c.members) mapped.members.push_back(idx[m]);
            std::sort(mapped.members.begin(), mapped.members.end());
            out.clusters.push_back(std::move(mapped));
        }
    }
    return out;
}

Clustering load_clustering_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("clusters") || !j["clusters"].is_array())
        throw std::runtime_error(path + ": expected an object with a \"clusters\" array");
    Clustering out;
    const json& arr = j["clusters"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& c = arr[i];
        const std::string ctx = "clusters[" + std::to_string(i) + "]";
        Cluster cluster;
        if (!c.contains("representative") || !c["representative"].is_number_integer())
            throw std::runtime_error(ctx + ".representative must be an integer");
        cluster.representative = c["representative"].get<int>();
        if (!c.contains("members") || !c["members"].is_array() || c["members"].empty())
            throw std::runtime_error(ctx + ".members must be a nonempty array");
        for (const json& m : c["members"]) {
            if (!m.is_number_integer())
                throw std::runtime_error(ctx + ".members must contain integers");
            cluster.members.push_back(m.get<int>());
        }
        std::sort(cluster.members.begin(), cluster.members.end());
        out.clusters.push_back(std::move(cluster));
    }
    return out;
}

void save_clustering_json(const std::string& path, const Clustering& clustering) {
    json arr = json::array();
    for (const Cluster& c : clustering.clusters) {
        json jc;
        jc["representative"] = c.representative;
        jc["members"] = c.members;
        arr.push_back(std::move(jc));
    }
    json j;
    j["clusters"] = std::move(arr);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump() << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace boxvote
