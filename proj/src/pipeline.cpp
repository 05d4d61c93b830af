#include "boxvote/pipeline.hpp"

namespace boxvote {

std::function<Clustering(const VoteSet&)> make_clusterer(const PipelineParams& params) {
    std::function<Clustering(const VoteSet&)> inner;
    if (params.algo == PipelineParams::Algo::Nmc) {
        const double tau = params.tau;
        inner = [tau](const VoteSet& v) { return nmc(v, tau); };
    } else {
        const double radius = params.sc_radius;
        inner = [radius](const VoteSet& v) { return spatial_cluster(v, radius); };
    }
    if (!params.per_semantic) return inner;
    return [inner](const VoteSet& v) { return cluster_per_semantic(v, inner); };
}

PipelineResult run_pipeline(const SceneCloud& scene, const BoxAnnotationSet& boxes,
                            const PipelineParams& params) {
    PipelineResult r;
    r.assoc = associate(scene, boxes, params.strategy);
    r.undecided = undecided_fraction(r.assoc);

    const VoteSet votes = simulate_votes(scene, boxes, r.assoc, params.noise);
    VoteSet fg = filter_background(votes, scene.background_class());
    if (scene.has_segments())
        fg = aggregate_votes_by_segment(fg, vote_segments(fg, scene.segment_ids));

    r.clustering = make_clusterer(params)(fg);
    r.masks = back_project(r.clustering, fg);
    r.clustered_votes = std::move(fg);
    r.report = evaluate(r.masks, gt_masks(scene), params.thresholds);
    return r;
}

}  // namespace boxvote
