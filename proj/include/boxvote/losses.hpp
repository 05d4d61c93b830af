#pragma once

#include <vector>

#include "boxvote/scene.hpp"
#include "boxvote/weaklabel.hpp"

namespace boxvote {

// Per-point network-style outputs: regression heads plus a class probability
// row per point (num_classes wide, background included).
struct VotePrediction {
    std::vector<Vec3> offset;      // predicted point -> box-center offset
    std::vector<Vec3> size;        // predicted box size, > 0
    std::vector<double> iou;       // predicted box/GT-box IoU estimate
    std::vector<double> sem_probs; // N x num_classes, row-major, rows sum to 1
    int num_classes = 0;

    std::size_t size_points() const { return offset.size(); }
    void validate(std::size_t n) const;  // throws on shape/positivity breach
};

// Binary cross-entropy with a soft target; p is clamped to [1e-7, 1 - 1e-7]
// before the logs.
double bce(double target, double p);

// Scales a nonnegative score vector to sum to 1 (uniform if all zero).
std::vector<double> normalize_probs(const std::vector<double>& scores);

// Mean L1 distance between predicted and target offsets over foreground
// points; throws if there are none.
double loss_offset(const VotePrediction& pred, const TrainingTargets& targets,
                   const Association& assoc);

// Same shape over sizes.
double loss_size(const VotePrediction& pred, const TrainingTargets& targets,
                 const Association& assoc);

// Mean BCE over foreground points between the predicted IoU and the actual
// IoU of the predicted box against the associated box.
double loss_score(const VotePrediction& pred, const Association& assoc,
                  const SceneCloud& scene, const BoxAnnotationSet& boxes);

// Mean categorical cross-entropy over decided points (background included),
// probabilities clamped at 1e-7.
double loss_sem(const VotePrediction& pred, const TrainingTargets& targets,
                const Association& assoc);

// Unweighted sum of the four components.
double loss_total(const VotePrediction& pred, const TrainingTargets& targets,
                  const Association& assoc, const SceneCloud& scene,
                  const BoxAnnotationSet& boxes);

}  // namespace boxvote
