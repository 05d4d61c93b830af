#pragma once

#include <cstdint>
#include <vector>

#include "boxvote/mask.hpp"
#include "boxvote/scene.hpp"

namespace boxvote {

// How points contained in two or more annotation boxes are resolved.
enum class AssocStrategy { DecidedOnly, ClosestBox, SmallestBox };

// Per-point tag: a box index, or one of the two sentinels below.
struct Association {
    static constexpr int kBackground = -1;
    static constexpr int kUndecided = -2;

    std::vector<int> tag;

    std::size_t size() const { return tag.size(); }
    bool is_foreground(std::size_t p) const { return tag[p] >= 0; }
    bool is_decided(std::size_t p) const { return tag[p] != kUndecided; }
};

// Per-point regression/classification targets derived from the association.
// offset/size are meaningful only at foreground points; sem is -1 at
// undecided points and the background class at background points.
struct TrainingTargets {
    std::vector<Vec3> offset;  // box center - point position
    std::vector<Vec3> size;
    std::vector<int> sem;
};

// Points in no box -> background; in exactly one box -> that box; in several
// -> per strategy (DecidedOnly: undecided; ClosestBox: nearest center, ties
// by smaller volume then lower index; SmallestBox: smallest volume, ties by
// nearer center then lower index).
Association associate(const SceneCloud& scene, const BoxAnnotationSet& boxes,
                      AssocStrategy strategy);

TrainingTargets make_targets(const Association& assoc, const SceneCloud& scene,
                             const BoxAnnotationSet& boxes);

double undecided_fraction(const Association& assoc);

// One mask per box with at least one assigned point, score 1.0.
std::vector<InstanceMask> labels_to_masks(const Association& assoc,
                                          const BoxAnnotationSet& boxes);

// Drops each box with probability drop_rate and jitters every min/max corner
// coordinate of the survivors by Uniform[-corner_jitter_max, +corner_jitter_max],
// re-normalized so min <= max with extent >= the degenerate-box floor.
// Draw order: one drop draw per box (all boxes), then six jitter draws per
// box (all boxes, applied only to survivors), so a box's jitter does not
// depend on which other boxes were dropped.
BoxAnnotationSet degrade_annotations(const BoxAnnotationSet& boxes, double drop_rate,
                                     double corner_jitter_max, std::uint64_t seed);

}  // namespace boxvote
