#pragma once

#include <functional>
#include <string>
#include <vector>

#include "boxvote/votes.hpp"

namespace boxvote {

struct Cluster {
    int representative = 0;
    std::vector<int> members;  // sorted ascending, includes the representative
};

// A partition of the vote indices; clusters ordered by descending
// representative score (the order they were formed in).
struct Clustering {
    std::vector<Cluster> clusters;

    std::size_t size() const { return clusters.size(); }
    // Throws unless the clusters partition {0..n_votes-1}.
    void validate(std::size_t n_votes) const;
};

// Candidate search used by nmc: Auto picks Grid for large sets, both paths
// produce identical output (tested).
enum class NmcMode { Auto, Naive, Grid };

// Greedy score-ordered clustering: repeatedly take the highest-scoring
// unclustered vote (score ties by ascending index) as representative and
// absorb all still-unclustered votes whose box IoU with it exceeds tau
// (strict). Disjoint by construction.
Clustering nmc(const VoteSet& votes, double tau, NmcMode mode = NmcMode::Auto);

// Baseline: connected components of vote centers under Euclidean distance
// <= radius (transitive); representative = highest score, ties by index.
Clustering spatial_cluster(const VoteSet& votes, double radius);

// Splits votes by predicted class, runs `inner` on each class's sub-set and
// merges, remapping indices back. Votes of different classes never share a
// cluster. Classes processed in ascending order.
Clustering cluster_per_semantic(
    const VoteSet& votes,
    const std::function<Clustering(const VoteSet&)>& inner);

Clustering load_clustering_json(const std::string& path);
void save_clustering_json(const std::string& path, const Clustering& clustering);

}  // namespace boxvote
