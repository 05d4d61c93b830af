#include "boxvote/mask.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "boxvote/rng.hpp"
#include "boxvote/scene.hpp"

namespace boxvote {

using nlohmann::json;

std::vector<InstanceMask> load_masks_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("instances") || !j["instances"].is_array())
        throw std::runtime_error(path + ": expected an object with an \"instances\" array");
    std::vector<InstanceMask> masks;
    const json& arr = j["instances"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& m = arr[i];
        const std::string ctx = "instances[" + std::to_string(i) + "]";
        InstanceMask mask;
        if (!m.contains("label") || !m["label"].is_number_integer())
            throw std::runtime_error(ctx + ".label must be an integer");
        mask.label = m["label"].get<int>();
        if (!m.contains("score") || !m["score"].is_number())
            throw std::runtime_error(ctx + ".score must be a number");
        mask.score = m["score"].get<double>();
        if (!m.contains("points") || !m["points"].is_array() || m["points"].empty())
            throw std::runtime_error(ctx + ".points must be a nonempty array");
        for (const json& p : m["points"]) {
            if (!p.is_number_integer() || p.get<int>() < 0)
                throw std::runtime_error(ctx + ".points must contain nonnegative integers");
            mask.points.push_back(p.get<int>());
        }
        std::sort(mask.points.begin(), mask.points.end());
        masks.push_back(std::move(mask));
    }
    return masks;
}

void save_masks_json(const std::string& path, const std::vector<InstanceMask>& masks) {
    json arr = json::array();
    for (const InstanceMask& m : masks) {
        json jm;
        jm["label"] = m.label;
        jm["score"] = m.score;
        jm["points"] = m.points;
        arr.push_back(std::move(jm));
    }
    json j;
    j["instances"] = std::move(arr);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump() << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

void save_masks_ply(const std::string& path, const SceneCloud& scene,
                    const std::vector<InstanceMask>& masks, std::uint64_t color_seed) {
    std::vector<std::array<unsigned char, 3>> color(scene.size(), {128, 128, 128});
    Rng rng(color_seed);
    for (const InstanceMask& m : masks) {
        const std::array<unsigned char, 3> c = {
            static_cast<unsigned char>(40 + rng.uniform_index(216)),
            static_cast<unsigned char>(40 + rng.uniform_index(216)),
            static_cast<unsigned char>(40 + rng.uniform_index(216))};
        for (int p : m.points) {
            if (p < 0 || static_cast<std::size_t>(p) >= scene.size())
                throw std::runtime_error("mask point index " + std::to_string(p) +
                                         " outside the scene");
            color[p] = c;
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "ply\n"
        << "format binary_little_endian 1.0\n"
        << "element vertex " << scene.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "end_header\n";
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const float xyz[3] = {static_cast<float>(scene.positions[i].x),
                              static_cast<float>(scene.positions[i].y),
                              static_cast<float>(scene.positions[i].z)};
        char buf[15];
        std::memcpy(buf, xyz, 12);
        std::memcpy(buf + 12, color[i].data(), 3);
        out.write(buf, 15);
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace boxvote
