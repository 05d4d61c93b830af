#include "boxvote/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace boxvote {

using nlohmann::json;

int SceneCloud::background_class() const {
    for (std::size_t i = 0; i < class_names.size(); ++i)
        if (class_names[i] == "background") return static_cast<int>(i);
    throw std::runtime_error("scene: class_names must contain \"background\"");
}

static void check_length(std::size_t got, std::size_t want, const char* field) {
    if (got != 0 && got != want)
        throw std::runtime_error("scene: " + std::string(field) + " has " +
                                 std::to_string(got) + " entries, expected " +
                                 std::to_string(want));
}

void SceneCloud::validate() const {
    if (class_names.empty())
        throw std::runtime_error("scene: class_names must not be empty");
    const int bg = background_class();
    const std::size_t n = positions.size();
    check_length(colors.size(), n, "colors");
    check_length(normals.size(), n, "normals");
    check_length(segment_ids.size(), n, "segment_ids");
    check_length(gt_instance_ids.size(), n, "gt_instance_ids");
    check_length(gt_semantics.size(), n, "gt_semantics");
    const int num_classes = static_cast<int>(class_names.size());
    for (std::size_t i = 0; i < colors.size(); ++i)
        for (int c = 0; c < 3; ++c)
            if (!(colors[i][c] >= 0.0 && colors[i][c] <= 1.0))
                throw std::runtime_error("scene: colors[" + std::to_string(i) +
                                         "] outside [0, 1]");
    for (std::size_t i = 0; i < normals.size(); ++i)
        if (std::abs(normals[i].norm() - 1.0) > 1e-4)
            throw std::runtime_error("scene: normals[" + std::to_string(i) +
                                     "] is not unit length");
    for (std::size_t i = 0; i < segment_ids.size(); ++i)
        if (segment_ids[i] < 0)
            throw std::runtime_error("scene: segment_ids[" + std::to_string(i) +
                                     "] is negative");
    for (std::size_t i = 0; i < gt_semantics.size(); ++i)
        if (gt_semantics[i] < 0 || gt_semantics[i] >= num_classes)
            throw std::runtime_error("scene: gt_semantics[" + std::to_string(i) +
                                     "] out of range");
    for (std::size_t i = 0; i < gt_instance_ids.size(); ++i)
        if (gt_instance_ids[i] < -1)
            throw std::runtime_error("scene: gt_instance_ids[" + std::to_string(i) +
                                     "] below -1");
    if (has_gt()) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool bg_inst = gt_instance_ids[i] == -1;
            const bool bg_sem = gt_semantics[i] == bg;
            if (bg_inst != bg_sem)
                throw std::runtime_error(
                    "scene: point " + std::to_string(i) +
                    " mixes background instance id with foreground semantic (or "
                    "vice versa)");
        }
    }
}

void validate_boxes(const BoxAnnotationSet& set, const SceneCloud& scene) {
    const int bg = scene.background_class();
    const int num_classes = static_cast<int>(scene.class_names.size());
    for (std::size_t i = 0; i < set.boxes.size(); ++i) {
        const Aabb& b = set.boxes[i];
        for (int c = 0; c < 3; ++c)
            if (!(b.size[c] > 0.0))
                throw std::runtime_error("boxes[" + std::to_string(i) +
                                         "]: size must be positive");
        if (b.label < 0 || b.label >= num_classes)
            throw std::runtime_error("boxes[" + std::to_string(i) +
                                     "]: label out of range");
        if (b.label == bg)
            throw std::runtime_error("boxes[" + std::to_string(i) +
                                     "]: label must not be the background class");
    }
}

// ---------------------------------------------------------------------------
// Voxel grid

namespace {

struct CellKey {
    int x, y, z;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t v : {static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.x)),
                                static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.y)),
                                static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.z))}) {
            h ^= v;
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace

VoxelMap voxelize(const SceneCloud& scene, double cell_size) {
    if (!(cell_size > 0.0))
        throw std::invalid_argument("voxelize: cell_size must be positive");
    VoxelMap map;
    map.cell_size = cell_size;
    map.point_cell.assign(scene.size(), -1);

    std::unordered_map<CellKey, int, CellKeyHash> lookup;
    lookup.reserve(scene.size());
    std::vector<double> best_d2;  // parallel to map.cells

    for (std::size_t p = 0; p < scene.size(); ++p) {
        const Vec3& pos = scene.positions[p];
        const CellKey key{static_cast<int>(std::floor(pos.x / cell_size)),
                          static_cast<int>(std::floor(pos.y / cell_size)),
                          static_cast<int>(std::floor(pos.z / cell_size))};
        const Vec3 center{(key.x + 0.5) * cell_size, (key.y + 0.5) * cell_size,
                          (key.z + 0.5) * cell_size};
        const double d2 = (pos - center).squared_norm();
        auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(map.cells.size()));
        if (inserted) {
            map.cells.push_back({{key.x, key.y, key.z}, static_cast<int>(p)});
            best_d2.push_back(d2);
        } else if (d2 < best_d2[it->second]) {
            // strict < keeps the lowest index on equal distances
            map.cells[it->second].point = static_cast<int>(p);
            best_d2[it->second] = d2;
        }
        map.point_cell[p] = it->second;
    }

    // canonical cell order, independent of hash iteration
    std::vector<int> order(map.cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return map.cells[a].index < map.cells[b].index;
    });
    std::vector<int> rank(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
    std::vector<VoxelCell> sorted(map.cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = map.cells[order[i]];
    map.cells = std::move(sorted);
    for (int& c : map.point_cell) c = rank[c];
    return map;
}

// ---------------------------------------------------------------------------
// Scene JSON

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

const json& require_key(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.is_object()) fail(ctx + " must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(ctx + " is missing required key \"" + key + "\"");
    return *it;
}

double parse_number(const json& j, const std::string& ctx) {
    if (!j.is_number()) fail(ctx + " must be a number");
    return j.get<double>();
}

int parse_int(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) fail(ctx + " must be an integer");
    return j.get<int>();
}

Vec3 parse_vec3(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 3) fail(ctx + " must be an array of 3 numbers");
    return {parse_number(j[0], ctx + "[0]"), parse_number(j[1], ctx + "[1]"),
            parse_number(j[2], ctx + "[2]")};
}

template <typename F>
void parse_per_point(const json& points, const char* key, std::size_t n, F&& item) {
    auto it = points.find(key);
    if (it == points.end()) return;
    const std::string ctx = "points." + std::string(key);
    if (!it->is_array()) fail(ctx + " must be an array");
    if (it->size() != n)
        fail(ctx + " has " + std::to_string(it->size()) + " entries, expected " +
             std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        item((*it)[i], ctx + "[" + std::to_string(i) + "]", i);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        fail(path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << text;
    if (!out) fail("failed writing " + path);
}

Aabb parse_box(const json& j, std::size_t i) {
    const std::string ctx = "boxes[" + std::to_string(i) + "]";
    Aabb box;
    box.center = parse_vec3(require_key(j, "center", ctx), ctx + ".center");
    box.size = parse_vec3(require_key(j, "size", ctx), ctx + ".size");
    box.label = parse_int(require_key(j, "label", ctx), ctx + ".label");
    return box;
}

std::vector<Aabb> parse_box_array(const json& j, const std::string& ctx) {
    if (!j.is_array()) fail(ctx + " must be an array");
    std::vector<Aabb> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_box(j[i], i));
    return out;
}

}  // namespace

SceneCloud load_scene_json(const std::string& path, BoxAnnotationSet* boxes_out) {
    const json j = read_json_file(path);
    if (!j.is_object()) fail(path + ": top level must be an object");

    SceneCloud scene;
    const json& names = require_key(j, "class_names", "scene");
    if (!names.is_array()) fail("class_names must be an array of strings");
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!names[i].is_string())
            fail("class_names[" + std::to_string(i) + "] must be a string");
        scene.class_names.push_back(names[i].get<std::string>());
    }

    const json& points = require_key(j, "points", "scene");
    const json& position = require_key(points, "position", "points");
    if (!position.is_array()) fail("points.position must be an array");
    const std::size_t n = position.size();
    scene.positions.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        scene.positions.push_back(
            parse_vec3(position[i], "points.position[" + std::to_string(i) + "]"));

    parse_per_point(points, "color", n, [&](const json& v, const std::string& ctx, std::size_t) {
        const Vec3 c = parse_vec3(v, ctx);
        scene.colors.push_back({c.x, c.y, c.z});
    });
    parse_per_point(points, "normal", n, [&](const json& v, const std::string& ctx, std::size_t) {
        scene.normals.push_back(parse_vec3(v, ctx));
    });
    parse_per_point(points, "segment_id", n,
                    [&](const json& v, const std::string& ctx, std::size_t) {
                        scene.segment_ids.push_back(parse_int(v, ctx));
                    });
    parse_per_point(points, "gt_instance_id", n,
                    [&](const json& v, const std::string& ctx, std::size_t) {
                        scene.gt_instance_ids.push_back(parse_int(v, ctx));
                    });
    parse_per_point(points, "gt_semantic", n,
                    [&](const json& v, const std::string& ctx, std::size_t) {
                        scene.gt_semantics.push_back(parse_int(v, ctx));
                    });
    if (scene.gt_instance_ids.empty() != scene.gt_semantics.empty())
        fail("points.gt_instance_id and points.gt_semantic must be given together");

    scene.validate();

    if (auto it = j.find("boxes"); it != j.end()) {
        BoxAnnotationSet set;
        set.boxes = parse_box_array(*it, "boxes");
        validate_boxes(set, scene);
        if (boxes_out) *boxes_out = std::move(set);
    } else if (boxes_out) {
        boxes_out->boxes.clear();
    }
    return scene;
}

void save_scene_json(const std::string& path, const SceneCloud& scene,
                     const BoxAnnotationSet* boxes) {
    json points;
    json position = json::array();
    for (const Vec3& p : scene.positions) position.push_back({p.x, p.y, p.z});
    points["position"] = std::move(position);
    if (scene.has_colors()) {
        json arr = json::array();
        for (const auto& c : scene.colors) arr.push_back({c[0], c[1], c[2]});
        points["color"] = std::move(arr);
    }
    if (scene.has_normals()) {
        json arr = json::array();
        for (const Vec3& v : scene.normals) arr.push_back({v.x, v.y, v.z});
        points["normal"] = std::move(arr);
    }
    if (scene.has_segments()) points["segment_id"] = scene.segment_ids;
    if (!scene.gt_instance_ids.empty()) points["gt_instance_id"] = scene.gt_instance_ids;
    if (!scene.gt_semantics.empty()) points["gt_semantic"] = scene.gt_semantics;

    json j;
    j["class_names"] = scene.class_names;
    j["points"] = std::move(points);
    if (boxes && !boxes->empty()) {
        json arr = json::array();
        for (const Aabb& b : boxes->boxes) {
            json jb;
            jb["center"] = {b.center.x, b.center.y, b.center.z};
            jb["size"] = {b.size.x, b.size.y, b.size.z};
            jb["label"] = b.label;
            arr.push_back(std::move(jb));
        }
        j["boxes"] = std::move(arr);
    }
    write_text_file(path, j.dump() + "\n");
}

BoxAnnotationSet load_boxes_json(const std::string& path) {
    const json j = read_json_file(path);
    BoxAnnotationSet set;
    if (j.is_array()) {
        set.boxes = parse_box_array(j, "boxes");
    } else if (j.is_object()) {
        set.boxes = parse_box_array(require_key(j, "boxes", "boxes file"), "boxes");
    } else {
        fail(path + ": expected an array of boxes or an object with a \"boxes\" key");
    }
    return set;
}

void save_boxes_json(const std::string& path, const BoxAnnotationSet& set) {
    json arr = json::array();
    for (const Aabb& b : set.boxes) {
        json jb;
        jb["center"] = {b.center.x, b.center.y, b.center.z};
        jb["size"] = {b.size.x, b.size.y, b.size.z};
        jb["label"] = b.label;
        arr.push_back(std::move(jb));
    }
    json j;
    j["boxes"] = std::move(arr);
    write_text_file(path, j.dump() + "\n");
}

// ---------------------------------------------------------------------------
// PLY ingest (ascii / binary little-endian; x y z required, rgb optional)

namespace {

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

std::size_t scalar_size(const std::string& type, const std::string& path) {
    if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
    if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
    if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
    if (type == "float" || type == "float32") return 4;
    if (type == "double" || type == "float64") return 8;
    fail(path + ": unknown ply property type \"" + type + "\"");
}

double decode_scalar(const unsigned char* p, const std::string& type) {
    auto load = [&](auto v) {
        std::memcpy(&v, p, sizeof v);
        return static_cast<double>(v);
    };
    if (type == "char" || type == "int8") return load(std::int8_t{});
    if (type == "uchar" || type == "uint8") return load(std::uint8_t{});
    if (type == "short" || type == "int16") return load(std::int16_t{});
    if (type == "ushort" || type == "uint16") return load(std::uint16_t{});
    if (type == "int" || type == "int32") return load(std::int32_t{});
    if (type == "uint" || type == "uint32") return load(std::uint32_t{});
    if (type == "float" || type == "float32") return load(float{});
    return load(double{});  // double / float64
}

}  // namespace

SceneCloud load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    // --- header ---
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        std::size_t end = data.find('\n', pos);
        if (end == std::string::npos) fail(path + ": unterminated ply header");
        std::string line = data.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") fail(path + ": not a ply file (missing magic)");
    bool binary = false;
    bool have_format = false;
    std::vector<PlyElement> elements;
    for (;;) {
        const std::string line = next_line();
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "end_header") break;
        if (word == "comment" || word == "obj_info" || word.empty()) continue;
        if (word == "format") {
            std::string fmt, version;
            ss >> fmt >> version;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else fail(path + ": unsupported ply format \"" + fmt + "\"");
            have_format = true;
        } else if (word == "element") {
            PlyElement el;
            ss >> el.name >> el.count;
            if (ss.fail()) fail(path + ": malformed element line \"" + line + "\"");
            elements.push_back(std::move(el));
        } else if (word == "property") {
            if (elements.empty()) fail(path + ": property before any element");
            PlyProperty prop;
            std::string t;
            ss >> t;
            if (t == "list") {
                prop.is_list = true;
                std::string count_type, value_type;
                ss >> count_type >> value_type >> prop.name;
            } else {
                prop.type = t;
                ss >> prop.name;
            }
            if (ss.fail()) fail(path + ": malformed property line \"" + line + "\"");
            elements.back().props.push_back(std::move(prop));
        } else {
            fail(path + ": unrecognized header line \"" + line + "\"");
        }
    }
    if (!have_format) fail(path + ": ply header has no format line");

    SceneCloud scene;
    scene.class_names = {"background"};

    for (const PlyElement& el : elements) {
        if (el.name != "vertex") {
            if (scene.positions.empty() && el.count > 0)
                fail(path + ": element \"" + el.name + "\" precedes vertex data");
            break;  // vertices done; trailing elements (faces, ...) ignored
        }
        int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
        std::vector<std::size_t> offsets(el.props.size(), 0);
        std::size_t record = 0;
        for (std::size_t k = 0; k < el.props.size(); ++k) {
            const PlyProperty& p = el.props[k];
            if (p.is_list)
                fail(path + ": list property \"" + p.name + "\" in vertex element is not supported");
            offsets[k] = record;
            record += scalar_size(p.type, path);
            auto want_float = [&](const char* nm) {
                if (p.type != "float" && p.type != "float32" && p.type != "double" &&
                    p.type != "float64")
                    fail(path + ": property \"" + std::string(nm) + "\" must be float32 or float64");
            };
            if (p.name == "x") { want_float("x"); ix = static_cast<int>(k); }
            else if (p.name == "y") { want_float("y"); iy = static_cast<int>(k); }
            else if (p.name == "z") { want_float("z"); iz = static_cast<int>(k); }
            else if (p.name == "red") { ir = static_cast<int>(k); }
            else if (p.name == "green") { ig = static_cast<int>(k); }
            else if (p.name == "blue") { ib = static_cast<int>(k); }
        }
        if (ix < 0 || iy < 0 || iz < 0)
            fail(path + ": vertex element lacks x, y, z properties");
        const bool rgb = ir >= 0 && ig >= 0 && ib >= 0;
        if (rgb)
            for (int k : {ir, ig, ib})
                if (el.props[k].type != "uchar" && el.props[k].type != "uint8")
                    fail(path + ": color properties must be uchar");

        scene.positions.reserve(el.count);
        if (rgb) scene.colors.reserve(el.count);

        if (binary) {
            if (pos + record * el.count > data.size())
                fail(path + ": truncated vertex data");
            const auto* base = reinterpret_cast<const unsigned char*>(data.data()) + pos;
            for (std::size_t i = 0; i < el.count; ++i) {
                const unsigned char* rec = base + i * record;
                auto at = [&](int k) { return decode_scalar(rec + offsets[k], el.props[k].type); };
                scene.positions.push_back({at(ix), at(iy), at(iz)});
                if (rgb)
                    scene.colors.push_back({at(ir) / 255.0, at(ig) / 255.0, at(ib) / 255.0});
            }
            pos += record * el.count;
        } else {
            for (std::size_t i = 0; i < el.count; ++i) {
                if (pos >= data.size())
                    fail(path + ": truncated vertex data at record " + std::to_string(i));
                std::size_t end = data.find('\n', pos);
                if (end == std::string::npos) end = data.size();
                std::istringstream ss(data.substr(pos, end - pos));
                pos = end + 1;
                std::vector<double> vals(el.props.size());
                for (std::size_t k = 0; k < el.props.size(); ++k)
                    if (!(ss >> vals[k]))
                        fail(path + ": malformed vertex record " + std::to_string(i));
                scene.positions.push_back({vals[ix], vals[iy], vals[iz]});
                if (rgb)
                    scene.colors.push_back(
                        {vals[ir] / 255.0, vals[ig] / 255.0, vals[ib] / 255.0});
            }
        }
    }

    scene.validate();
    return scene;
}

SceneCloud load_scene(const std::string& path, SceneFormat format,
                      BoxAnnotationSet* boxes_out) {
    switch (format) {
        case SceneFormat::SceneJson:
            return load_scene_json(path, boxes_out);
        case SceneFormat::Ply:
            if (boxes_out) boxes_out->boxes.clear();
            return load_ply(path);
    }
    throw std::invalid_argument("load_scene: unknown format");
}

}  // namespace boxvote
