#pragma once

#include <string>
#include <vector>

#include "boxvote/geometry.hpp"

namespace boxvote {

// One box vote: predicted box (label mirrors `semantic`), confidence score,
// predicted class.
struct Vote {
    Aabb box;
    double score = 0.0;
    int semantic = 0;
};

// A set of votes plus, for each vote, the original point indices it stands
// for: singletons for per-point votes, whole segments after aggregation.
struct VoteSet {
    std::vector<Vote> votes;
    std::vector<std::vector<int>> expansion;

    std::size_t size() const { return votes.size(); }
    bool empty() const { return votes.empty(); }

    // Throws std::runtime_error if expansions are empty/overlapping or
    // scores are not finite probabilities.
    void validate() const;
};

// Maps each vote to the segment of its expansion points; every expansion
// must lie within a single segment.
std::vector<int> vote_segments(const VoteSet& votes,
                               const std::vector<int>& point_segment_ids);

// Collapses votes with equal segment id (one id per vote) into one vote per
// segment: component-wise mean of center, size and score; semantic by
// majority over member votes, ties by lowest class id. Output is ordered by
// ascending segment id; expansions are the unions of member expansions.
VoteSet aggregate_votes_by_segment(const VoteSet& votes,
                                   const std::vector<int>& segment_ids);

VoteSet load_votes_json(const std::string& path);
void save_votes_json(const std::string& path, const VoteSet& votes);

}  // namespace boxvote
