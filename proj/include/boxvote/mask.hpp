#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace boxvote {

struct SceneCloud;

// One predicted (or ground-truth) instance: the point indices it covers,
// its class, and a confidence score.
struct InstanceMask {
    std::vector<int> points;  // sorted ascending, nonempty
    int label = 0;
    double score = 1.0;
};

std::vector<InstanceMask> load_masks_json(const std::string& path);
void save_masks_json(const std::string& path, const std::vector<InstanceMask>& masks);

// Binary little-endian PLY with one seeded random color per mask (points in
// no mask are gray), for eyeballing results in a viewer.
void save_masks_ply(const std::string& path, const SceneCloud& scene,
                    const std::vector<InstanceMask>& masks, std::uint64_t color_seed = 0);

}  // namespace boxvote
