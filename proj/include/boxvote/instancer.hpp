#pragma once

#include <utility>
#include <vector>

#include "boxvote/clustering.hpp"
#include "boxvote/mask.hpp"
#include "boxvote/votes.hpp"
#include "boxvote/weaklabel.hpp"

namespace boxvote {

// Drops votes whose predicted class is `background_class`, keeping order.
VoteSet filter_background(const VoteSet& votes, int background_class);

// One mask per cluster: the union of member expansions; label by expansion-
// size-weighted majority over member semantics (ties by lowest class id);
// score = the representative's predicted IoU. Masks ordered by ascending
// representative index.
std::vector<InstanceMask> back_project(const Clustering& clustering,
                                       const VoteSet& votes);

// Greedy non-maximum suppression: descending score (ties by index); a box is
// kept iff its IoU with every previously kept box is <= iou_thresh. Returns
// kept indices in keep order.
std::vector<int> nms(const std::vector<std::pair<Aabb, double>>& boxes,
                     double iou_thresh);

// Detect-then-segment baseline: NMS over the (non-background) box votes,
// then point-in-box association against the detected boxes and weak-label
// masks from it, each mask scored by its detected box's vote score.
std::vector<InstanceMask> detector_baseline(const VoteSet& votes,
                                            const SceneCloud& scene,
                                            double nms_thresh,
                                            AssocStrategy strategy);

// Fits an axis-aligned box to every mask (label carried over).
BoxAnnotationSet masks_to_boxes(const std::vector<InstanceMask>& masks,
                                const SceneCloud& scene);

}  // namespace boxvote
