#include <doctest.h>

#include <cmath>

#include "boxvote/scene.hpp"
#include "boxvote/mask.hpp"
#include "boxvote/rng.hpp"
#include "helpers.hpp"

using namespace boxvote;
using testutil::box;

namespace {

SceneCloud full_scene() {
    SceneCloud s;
    s.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 2, 1}};
    s.colors = {{0.1, 0.2, 0.3}, {1, 1, 1}, {0, 0, 0}, {0.5, 0.5, 0.5}};
    s.normals = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 1}};
    s.segment_ids = {0, 0, 1, 2};
    s.gt_instance_ids = {0, 0, 1, -1};
    s.gt_semantics = {1, 1, 2, 0};
    s.class_names = {"background", "chair", "table"};
    return s;
}

}  // namespace

TEST_CASE("scene validation accepts a consistent cloud") {
    CHECK_NOTHROW(full_scene().validate());
}

TEST_CASE("scene validation names the offending field") {
    SceneCloud s = full_scene();
    s.colors.pop_back();
    CHECK_THROWS_WITH_AS(s.validate(),
                         doctest::Contains("colors"), std::runtime_error);

    s = full_scene();
    s.colors[1] = {1.5, 0, 0};
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("colors[1]"),
                         std::runtime_error);

    s = full_scene();
    s.normals[2] = {0.5, 0, 0};  // not unit length
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("normals[2]"),
                         std::runtime_error);

    s = full_scene();
    s.gt_semantics[0] = 7;  // out of class range
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("gt_semantics[0]"),
                         std::runtime_error);

    s = full_scene();
    s.gt_semantics[3] = 1;  // background instance with foreground class
    CHECK_THROWS_AS(s.validate(), std::runtime_error);
}

TEST_CASE("background class lookup") {
    CHECK(full_scene().background_class() == 0);
    SceneCloud s = full_scene();
    s.class_names = {"chair", "background"};
    s.gt_semantics = {0, 0, 0, 1};
    CHECK(s.background_class() == 1);
    s.class_names = {"chair"};
    CHECK_THROWS_AS(s.background_class(), std::runtime_error);
}

TEST_CASE("scene json round trip preserves values") {
    const auto dir = testutil::temp_dir();
    const std::string path = (dir / "scene.json").string();
    const SceneCloud s = full_scene();
    BoxAnnotationSet boxes;
    boxes.boxes = {box(0.5, 0.2, 0.0, 1.2, 1.0, 0.4, 1)};
    save_scene_json(path, s, &boxes);

    BoxAnnotationSet loaded_boxes;
    const SceneCloud loaded = load_scene_json(path, &loaded_boxes);
    REQUIRE(loaded.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK((loaded.positions[i] - s.positions[i]).norm() <= 1e-9);
        CHECK(std::fabs(loaded.colors[i][0] - s.colors[i][0]) <= 1e-9);
        CHECK((loaded.normals[i] - s.normals[i]).norm() <= 1e-9);
        CHECK(loaded.segment_ids[i] == s.segment_ids[i]);
        CHECK(loaded.gt_instance_ids[i] == s.gt_instance_ids[i]);
        CHECK(loaded.gt_semantics[i] == s.gt_semantics[i]);
    }
    CHECK(loaded.class_names == s.class_names);
    REQUIRE(loaded_boxes.size() == 1);
    CHECK((loaded_boxes.boxes[0].center - boxes.boxes[0].center).norm() <= 1e-9);
    CHECK(loaded_boxes.boxes[0].label == 1);

    // Second save is byte-identical.
    const std::string path2 = (dir / "scene2.json").string();
    save_scene_json(path2, loaded, &loaded_boxes);
    CHECK(testutil::read_file(path) == testutil::read_file(path2));
}

TEST_CASE("scene json schema errors name field and index") {
    const auto dir = testutil::temp_dir();
    const std::string path = (dir / "bad.json").string();

    testutil::write_file(path, R"({"class_names":["background"],"points":{)"
                               R"("position":[[0,0,0],[1,"x",0]]}})");
    CHECK_THROWS_WITH_AS(load_scene_json(path), doctest::Contains("position[1]"),
                         std::runtime_error);

    testutil::write_file(path, R"({"class_names":["background"],"points":{)"
                               R"("position":[[0,0,0]],"color":[[0,0,0],[1,1,1]]}})");
    CHECK_THROWS_WITH_AS(load_scene_json(path), doctest::Contains("color"),
                         std::runtime_error);

    testutil::write_file(path, "{not json");
    CHECK_THROWS_AS(load_scene_json(path), std::runtime_error);

    CHECK_THROWS_AS(load_scene_json((dir / "missing.json").string()),
                    std::runtime_error);
}

TEST_CASE("boxes json accepts bare arrays and wrapped objects") {
    const auto dir = testutil::temp_dir();
    const std::string path = (dir / "boxes.json").string();
    BoxAnnotationSet boxes;
    boxes.boxes = {box(1, 2, 3, 0.5, 0.6, 0.7, 2), box(0, 0, 0, 1, 1, 1, 1)};
    save_boxes_json(path, boxes);
    const BoxAnnotationSet loaded = load_boxes_json(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.boxes[0].label == 2);
    CHECK((loaded.boxes[1].size - Vec3{1, 1, 1}).norm() <= 1e-9);

    testutil::write_file(path,
                         R"([{"center":[0,0,0],"size":[1,1,1],"label":1}])");
    CHECK(load_boxes_json(path).size() == 1);
}

TEST_CASE("voxelize picks the representative nearest the cell center") {
    SceneCloud s = testutil::tiny_scene(
        {{0.001, 0.001, 0.001}, {0.015, 0.015, 0.015}, {0.025, 0.001, 0.001}});
    const VoxelMap vm = voxelize(s, 0.02);
    REQUIRE(vm.cells.size() == 2);
    CHECK(vm.cells[0].index == std::array<int, 3>{0, 0, 0});
    CHECK(vm.cells[0].point == 1);  // nearer to (0.01, 0.01, 0.01)
    CHECK(vm.cells[1].index == std::array<int, 3>{1, 0, 0});
    CHECK(vm.cells[1].point == 2);
    CHECK(vm.point_cell == std::vector<int>{0, 0, 1});
}

TEST_CASE("voxelize resolves distance ties by lowest point index") {
    // binary-exact coordinates so the two distances tie exactly
    SceneCloud s = testutil::tiny_scene({{0.5, 1.0, 1.0}, {1.5, 1.0, 1.0}});
    const VoxelMap vm = voxelize(s, 2.0);
    REQUIRE(vm.cells.size() == 1);
    CHECK(vm.cells[0].point == 0);
}

TEST_CASE("voxelize uses floor indexing for negative coordinates") {
    SceneCloud s = testutil::tiny_scene({{-0.001, 0.001, 0.001}});
    const VoxelMap vm = voxelize(s, 0.02);
    REQUIRE(vm.cells.size() == 1);
    CHECK(vm.cells[0].index == std::array<int, 3>{-1, 0, 0});
}

TEST_CASE("voxelize inverse maps every point to exactly one cell") {
    SceneCloud s = testutil::tiny_scene({});
    Rng rng(5);
    for (int i = 0; i < 500; ++i)
        s.positions.push_back(
            {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    const VoxelMap vm = voxelize(s, 0.05);
    REQUIRE(vm.point_cell.size() == s.size());
    for (std::size_t p = 0; p < s.size(); ++p) {
        const int c = vm.point_cell[p];
        REQUIRE(c >= 0);
        REQUIRE(c < static_cast<int>(vm.cells.size()));
        // The point lies inside its cell.
        for (int axis = 0; axis < 3; ++axis) {
            const int idx =
                static_cast<int>(std::floor(s.positions[p][axis] / vm.cell_size));
            CHECK(idx == vm.cells[c].index[axis]);
        }
    }
    // Cells are sorted and unique.
    for (std::size_t c = 1; c < vm.cells.size(); ++c)
        CHECK(vm.cells[c - 1].index < vm.cells[c].index);
    CHECK_THROWS_AS(voxelize(s, 0.0), std::invalid_argument);
}

TEST_CASE("ascii ply loads positions and rescales colors") {
    const auto dir = testutil::temp_dir();
    const std::string path = (dir / "cloud.ply").string();
    testutil::write_file(path,
                         "ply\n"
                         "format ascii 1.0\n"
                         "comment hand written fixture\n"
                         "element vertex 2\n"
                         "property float x\n"
                         "property float y\n"
                         "property float z\n"
                         "property uchar red\n"
                         "property uchar green\n"
                         "property uchar blue\n"
                         "end_header\n"
                         "0.5 1.5 -2.0 255 0 51\n"
                         "1.0 0.0 3.25 0 128 255\n");
    const SceneCloud s = load_ply(path);
    REQUIRE(s.size() == 2);
    CHECK((s.positions[0] - Vec3{0.5, 1.5, -2.0}).norm() <= 1e-6);
    CHECK((s.positions[1] - Vec3{1.0, 0.0, 3.25}).norm() <= 1e-6);
    REQUIRE(s.has_colors());
    CHECK(s.colors[0][0] == doctest::Approx(1.0));
    CHECK(s.colors[0][2] == doctest::Approx(51.0 / 255.0));
    CHECK(s.colors[1][1] == doctest::Approx(128.0 / 255.0));
    CHECK(s.class_names == std::vector<std::string>{"background"});
}

TEST_CASE("binary ply round trips through the mask exporter") {
    const auto dir = testutil::temp_dir();
    const std::string path = (dir / "masks.ply").string();
    SceneCloud s =
        testutil::tiny_scene({{0.25, -1.5, 2.0}, {3.0, 0.125, -0.5}, {1, 2, 3}});
    InstanceMask m;
    m.points = {0, 2};
    m.label = 1;
    save_masks_ply(path, s, {m}, 0);

    const SceneCloud loaded = load_ply(path);
    REQUIRE(loaded.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK((loaded.positions[i] - s.positions[i]).norm() <= 1e-6);
    REQUIRE(loaded.has_colors());
    // Points 0 and 2 share the mask color; point 1 is neutral gray.
    CHECK(loaded.colors[0] == loaded.colors[2]);
    CHECK(loaded.colors[1][0] == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("ply loader rejects malformed headers") {
    const auto dir = testutil::temp_dir();
    const std::string path = (dir / "bad.ply").string();
    testutil::write_file(path,
                         "ply\nformat ascii 1.0\nelement vertex 1\n"
                         "property float x\nproperty float y\nend_header\n0 0\n");
    CHECK_THROWS_AS(load_ply(path), std::runtime_error);  // no z property

    testutil::write_file(path, "not a ply\n");
    CHECK_THROWS_AS(load_ply(path), std::runtime_error);
}

TEST_CASE("masks json round trip sorts point lists") {
    const auto dir = testutil::temp_dir();
    const std::string path = (dir / "masks.json").string();
    InstanceMask a;
    a.points = {3, 1, 2};
    a.label = 2;
    a.score = 0.75;
    save_masks_json(path, {a});
    const auto masks = load_masks_json(path);
    REQUIRE(masks.size() == 1);
    CHECK(masks[0].points == std::vector<int>{1, 2, 3});
    CHECK(masks[0].label == 2);
    CHECK(masks[0].score == doctest::Approx(0.75));
}
