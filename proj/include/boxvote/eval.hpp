#pragma once

#include <string>
#include <vector>

#include "boxvote/mask.hpp"
#include "boxvote/scene.hpp"
#include "boxvote/weaklabel.hpp"

namespace boxvote {

struct ClassEval {
    int class_id = 0;
    std::vector<double> ap;       // parallel to EvalReport::thresholds
    std::vector<int> tp, fp, fn;  // parallel to thresholds
    double precision50 = 0.0;     // at IoU 0.5, 0 when the class has no predictions
    double recall50 = 0.0;
};

// Aggregates are always computed at the canonical thresholds (0.25, 0.50,
// and the 0.50..0.95 decade), independent of the requested threshold list.
struct EvalReport {
    std::vector<double> thresholds;
    std::vector<ClassEval> classes;          // classes present in GT, ascending id
    std::vector<int> ignored_pred_classes;   // predicted classes with no GT
    double map25 = 0.0, map50 = 0.0, map = 0.0;
    double mprec50 = 0.0, mrec50 = 0.0;
    bool empty_predictions = false;
};

// {0.25, 0.50, 0.55, ..., 0.95}
std::vector<double> default_thresholds();

// |a ∩ b| / |a ∪ b| over sorted index sets; throws if both are empty.
double mask_iou(const std::vector<int>& a, const std::vector<int>& b);

struct MatchResult {
    double ap = 0.0;
    int tp = 0, fp = 0, fn = 0;
};

// Single-class greedy matching and average precision: predictions in
// descending score order (ties by larger mask, then lower first point) match
// the unmatched GT with highest mask IoU when that IoU >= iou_thresh.
// Precision is made non-increasing by right-to-left max interpolation; AP
// integrates it over recall by the rectangle rule.
MatchResult match_and_ap(const std::vector<InstanceMask>& preds,
                         const std::vector<InstanceMask>& gts, double iou_thresh);

EvalReport evaluate(const std::vector<InstanceMask>& preds,
                    const std::vector<InstanceMask>& gts,
                    std::vector<double> thresholds = {});

// Detection proxy: fits a box to every mask and matches by box IoU instead
// of mask IoU.
EvalReport evaluate_detection(const std::vector<InstanceMask>& preds,
                              const std::vector<InstanceMask>& gts,
                              const SceneCloud& scene,
                              std::vector<double> thresholds = {});

// Ground-truth instances of a scene as masks (score 1.0), ascending id.
std::vector<InstanceMask> gt_masks(const SceneCloud& scene);

// How lossy box-derived labels are: evaluates the weak-label masks of
// associate(scene, boxes, strategy) against the scene's GT masks.
EvalReport label_quality(const SceneCloud& scene, const BoxAnnotationSet& boxes,
                         AssocStrategy strategy, std::vector<double> thresholds = {});

std::string report_table(const EvalReport& report,
                         const std::vector<std::string>& class_names);
void save_report_json(const std::string& path, const EvalReport& report,
                      const std::vector<std::string>& class_names);

}  // namespace boxvote
