#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "boxvote/scene.hpp"
#include "boxvote/votes.hpp"

namespace testutil {

// Fresh unique directory under the system temp dir.
inline std::filesystem::path temp_dir() {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("boxvote_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline boxvote::Aabb box(double cx, double cy, double cz, double sx, double sy,
                         double sz, int label = 1) {
    boxvote::Aabb b;
    b.center = {cx, cy, cz};
    b.size = {sx, sy, sz};
    b.label = label;
    return b;
}

inline boxvote::Aabb unit_cube(double cx, double cy = 0, double cz = 0,
                               int label = 1) {
    return box(cx, cy, cz, 1, 1, 1, label);
}

inline boxvote::Vote vote(const boxvote::Aabb& b, double score, int semantic) {
    boxvote::Vote v;
    v.box = b;
    v.score = score;
    v.semantic = semantic;
    return v;
}

// Minimal valid scene: positions only, classes {background, object_0}.
inline boxvote::SceneCloud tiny_scene(const std::vector<boxvote::Vec3>& positions,
                                      int num_fg_classes = 1) {
    boxvote::SceneCloud scene;
    scene.positions = positions;
    scene.class_names = {"background"};
    for (int c = 0; c < num_fg_classes; ++c)
        scene.class_names.push_back("object_" + std::to_string(c));
    return scene;
}

}  // namespace testutil
