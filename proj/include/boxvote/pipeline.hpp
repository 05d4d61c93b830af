#pragma once

#include <functional>
#include <vector>

#include "boxvote/clustering.hpp"
#include "boxvote/eval.hpp"
#include "boxvote/instancer.hpp"
#include "boxvote/oracle.hpp"

namespace boxvote {

struct PipelineParams {
    AssocStrategy strategy = AssocStrategy::SmallestBox;
    enum class Algo { Nmc, Sc };
    Algo algo = Algo::Nmc;
    double tau = 0.3;        // box-IoU threshold for the greedy clusterer
    double sc_radius = 0.1;  // center-distance radius for the baseline clusterer
    bool per_semantic = false;
    VoteNoise noise;                 // carries its own seed
    std::vector<double> thresholds;  // empty = default evaluation thresholds
};

struct PipelineResult {
    Association assoc;
    VoteSet clustered_votes;  // post filter (and aggregation, when segments exist)
    Clustering clustering;
    std::vector<InstanceMask> masks;
    EvalReport report;
    double undecided = 0.0;
};

// Bundles the clustering choice as a single callable.
std::function<Clustering(const VoteSet&)> make_clusterer(const PipelineParams& params);

// associate -> simulate -> filter background -> aggregate over segments (iff
// the scene has them) -> cluster -> back-project -> evaluate against GT.
PipelineResult run_pipeline(const SceneCloud& scene, const BoxAnnotationSet& boxes,
                            const PipelineParams& params);

}  // namespace boxvote
