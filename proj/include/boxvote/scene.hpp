#pragma once

#include <array>
#include <string>
#include <vector>

#include "boxvote/geometry.hpp"

namespace boxvote {

// Immutable point set with optional attributes. Optional arrays are either
// empty or exactly N long; validate() enforces that.
struct SceneCloud {
    std::vector<Vec3> positions;
    std::vector<std::array<double, 3>> colors;  // rgb in [0, 1]
    std::vector<Vec3> normals;                  // unit length
    std::vector<int> segment_ids;
    std::vector<int> gt_instance_ids;           // -1 = background
    std::vector<int> gt_semantics;
    std::vector<std::string> class_names;       // must contain "background"

    std::size_t size() const { return positions.size(); }
    bool has_colors() const { return !colors.empty(); }
    bool has_normals() const { return !normals.empty(); }
    bool has_segments() const { return !segment_ids.empty(); }
    bool has_gt() const { return !gt_instance_ids.empty() && !gt_semantics.empty(); }

    // Index of the reserved "background" name; throws if absent.
    int background_class() const;

    // Throws std::runtime_error naming the offending field on invariant breach.
    void validate() const;
};

struct BoxAnnotationSet {
    std::vector<Aabb> boxes;

    std::size_t size() const { return boxes.size(); }
    bool empty() const { return boxes.empty(); }
};

struct VoxelCell {
    std::array<int, 3> index;
    int point;  // representative point, lies inside this cell
};

// One representative point per occupied cell plus the inverse mapping,
// so per-cell values can be expanded back to all N points.
struct VoxelMap {
    double cell_size = 0.0;
    std::vector<VoxelCell> cells;
    std::vector<int> point_cell;  // for each original point, index into cells
};

// 2 cm grid by default; the representative is the point nearest to the cell
// center, ties broken by lowest point index.
VoxelMap voxelize(const SceneCloud& scene, double cell_size = 0.02);

enum class SceneFormat { SceneJson, Ply };

SceneCloud load_scene(const std::string& path, SceneFormat format,
                      BoxAnnotationSet* boxes_out = nullptr);
SceneCloud load_scene_json(const std::string& path, BoxAnnotationSet* boxes_out = nullptr);
SceneCloud load_ply(const std::string& path);
void save_scene_json(const std::string& path, const SceneCloud& scene,
                     const BoxAnnotationSet* boxes = nullptr);

BoxAnnotationSet load_boxes_json(const std::string& path);
void save_boxes_json(const std::string& path, const BoxAnnotationSet& boxes);

// Checks box invariants against a scene's class table (positive sizes,
// known non-background labels).
void validate_boxes(const BoxAnnotationSet& boxes, const SceneCloud& scene);

}  // namespace boxvote
