#include "boxvote/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "boxvote/rng.hpp"

namespace boxvote {

using nlohmann::json;

namespace {

constexpr double kWallClearance = 0.45;  // box to room boundary
constexpr double kBoxMargin = 0.45;      // separating gap between boxes
constexpr double kNestedMargin = 0.02;   // inner box to outer box faces
constexpr int kPlacementTries = 1000;

}  // namespace

void SceneGenParams::validate() const {
    if (!(room.x > 0 && room.y > 0 && room.z > 0))
        throw std::invalid_argument("gen params: room extents must be positive");
    if (num_objects < 0)
        throw std::invalid_argument("gen params: num_objects must be >= 0");
    if (class_size_ranges.empty())
        throw std::invalid_argument("gen params: need at least one class size range");
    for (const auto& r : class_size_ranges)
        if (!(r[0] > 0 && r[1] >= r[0]))
            throw std::invalid_argument("gen params: size ranges must satisfy 0 < lo <= hi");
    if (points_per_object < 0 || background_points < 0)
        throw std::invalid_argument("gen params: point counts must be >= 0");
    if (segments_per_object < 0)
        throw std::invalid_argument("gen params: segments_per_object must be >= 0");
}

void VoteNoise::validate() const {
    if (center_sigma < 0 || size_sigma < 0 || score_noise_sigma < 0)
        throw std::invalid_argument("vote noise: sigmas must be >= 0");
    if (sem_flip_prob < 0 || sem_flip_prob > 1)
        throw std::invalid_argument("vote noise: sem_flip_prob must be in [0, 1]");
}

namespace {

// true if a and b are separated by at least `margin` along some axis
bool separated(const Aabb& a, const Aabb& b, double margin) {
    for (int c = 0; c < 3; ++c)
        if (std::abs(a.center[c] - b.center[c]) >= 0.5 * (a.size[c] + b.size[c]) + margin)
            return true;
    return false;
}

Vec3 sample_center(Rng& rng, const Vec3& room, const Vec3& size) {
    Vec3 c;
    for (int k = 0; k < 3; ++k) {
        const double lo = kWallClearance + 0.5 * size[k];
        const double hi = room[k] - kWallClearance - 0.5 * size[k];
        if (hi < lo)
            throw std::runtime_error("placement failed: box does not fit the room");
        c[k] = rng.uniform(lo, hi);
    }
    return c;
}

struct Placement {
    std::vector<Aabb> boxes;     // provisional sampling regions
    std::vector<int> anchor_of;  // for nested/touching: index of the partner box
};

Placement place_boxes(const SceneGenParams& p, Rng& rng) {
    const int num_classes = static_cast<int>(p.class_size_ranges.size());
    Placement out;
    out.anchor_of.assign(p.num_objects, -1);

    auto sample_size = [&](int cls) {
        const auto& r = p.class_size_ranges[cls];
        return Vec3{rng.uniform(r[0], r[1]), rng.uniform(r[0], r[1]),
                    rng.uniform(r[0], r[1])};
    };
    auto place_separated = [&](const Vec3& size, int label) {
        for (int attempt = 0; attempt < kPlacementTries; ++attempt) {
            Aabb box{sample_center(rng, p.room, size), size, label};
            bool ok = true;
            for (const Aabb& other : out.boxes)
                if (!separated(box, other, kBoxMargin)) {
                    ok = false;
                    break;
                }
            if (ok) return box;
        }
        throw std::runtime_error("placement failed");
    };

    for (int i = 0; i < p.num_objects; ++i) {
        const int label = 1 + i % num_classes;  // 0 is background
        switch (p.overlap_mode) {
            case SceneGenParams::Mode::None:
                out.boxes.push_back(place_separated(sample_size(i % num_classes), label));
                break;
            case SceneGenParams::Mode::Nested: {
                if (i % 2 == 0) {
                    out.boxes.push_back(place_separated(sample_size(i % num_classes), label));
                    break;
                }
                const Aabb& outer = out.boxes[i - 1];
                const double ratio = rng.uniform(0.35, 0.45);
                Aabb inner;
                inner.size = outer.size * ratio;
                inner.label = label;
                for (int k = 0; k < 3; ++k) {
                    const double slack =
                        0.5 * (outer.size[k] - inner.size[k]) - kNestedMargin;
                    if (slack < 0)
                        throw std::runtime_error("placement failed: nested box too large");
                    inner.center[k] = outer.center[k] + rng.uniform(-slack, slack);
                }
                out.anchor_of[i] = i - 1;
                out.boxes.push_back(inner);
                break;
            }
            case SceneGenParams::Mode::Touching: {
                if (i % 2 == 0) {
                    out.boxes.push_back(place_separated(sample_size(i % num_classes), label));
                    break;
                }
                // same class as its anchor, smaller, center nearby so the
                // boxes intersect
                const Aabb& big = out.boxes[i - 1];
                Aabb small;
                small.size = big.size * rng.uniform(0.42, 0.50);
                small.label = big.label;
                small.center = big.center;
                const int axis = static_cast<int>(rng.uniform_index(3));
                const double off = rng.uniform(0.08, 0.16) *
                                   (rng.uniform01() < 0.5 ? -1.0 : 1.0);
                small.center[axis] += off;
                out.anchor_of[i] = i - 1;
                out.boxes.push_back(small);
                break;
            }
        }
    }
    return out;
}

void add_segments(SceneCloud& scene, const std::vector<Aabb>& snapped,
                  const std::vector<std::vector<int>>& object_points,
                  int segments_per_object) {
    scene.segment_ids.assign(scene.size(), -1);
    int next = 0;
    const int divs = std::max(
        1, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(segments_per_object)))));
    for (std::size_t o = 0; o < snapped.size(); ++o) {
        const Aabb& box = snapped[o];
        const Vec3 lo = box.min_corner();
        std::unordered_map<int, int> chunk_seg;
        for (int pi : object_points[o]) {
            int key = 0;
            for (int k = 0; k < 3; ++k) {
                const double cell = box.size[k] / divs;
                int c = cell > 0 ? static_cast<int>((scene.positions[pi][k] - lo[k]) / cell)
                                 : 0;
                c = std::clamp(c, 0, divs - 1);
                key = key * divs + c;
            }
            auto [it, inserted] = chunk_seg.try_emplace(key, next);
            if (inserted) ++next;
            scene.segment_ids[pi] = it->second;
        }
    }
    for (std::size_t i = 0; i < scene.size(); ++i)
        if (scene.segment_ids[i] < 0) scene.segment_ids[i] = next++;
}

}  // namespace

GeneratedScene gen_scene(const SceneGenParams& params) {
    params.validate();
    Rng rng(params.seed);
    const int num_classes = static_cast<int>(params.class_size_ranges.size());

    const Placement placement = place_boxes(params, rng);

    GeneratedScene out;
    SceneCloud& scene = out.scene;
    scene.class_names.push_back("background");
    for (int c = 0; c < num_classes; ++c)
        scene.class_names.push_back("object_" + std::to_string(c));

    // object points, uniform inside each provisional box
    std::vector<std::vector<int>> object_points(placement.boxes.size());
    for (std::size_t o = 0; o < placement.boxes.size(); ++o) {
        const Aabb& box = placement.boxes[o];
        const Vec3 lo = box.min_corner();
        for (int i = 0; i < params.points_per_object; ++i) {
            Vec3 pos;
            for (int k = 0; k < 3; ++k) pos[k] = lo[k] + rng.uniform01() * box.size[k];
            object_points[o].push_back(static_cast<int>(scene.positions.size()));
            scene.positions.push_back(pos);
            scene.gt_instance_ids.push_back(static_cast<int>(o));
            scene.gt_semantics.push_back(box.label);
        }
    }

    // background points on the floor and the four walls
    for (int i = 0; i < params.background_points; ++i) {
        const std::uint64_t surface = rng.uniform_index(5);
        const double u = rng.uniform01();
        const double v = rng.uniform01();
        Vec3 pos;
        switch (surface) {
            case 0: pos = {u * params.room.x, v * params.room.y, 0.0}; break;
            case 1: pos = {0.0, u * params.room.y, v * params.room.z}; break;
            case 2: pos = {params.room.x, u * params.room.y, v * params.room.z}; break;
            case 3: pos = {u * params.room.x, 0.0, v * params.room.z}; break;
            default: pos = {u * params.room.x, params.room.y, v * params.room.z}; break;
        }
        scene.positions.push_back(pos);
        scene.gt_instance_ids.push_back(-1);
        scene.gt_semantics.push_back(0);
    }

    // snap annotation boxes to the realized points
    for (std::size_t o = 0; o < placement.boxes.size(); ++o) {
        std::vector<Vec3> pts;
        pts.reserve(object_points[o].size());
        for (int pi : object_points[o]) pts.push_back(scene.positions[pi]);
        if (pts.empty())
            throw std::runtime_error("placement failed: object without points");
        out.boxes.boxes.push_back(fit_aabb(pts, placement.boxes[o].label));
    }

    // nested pairs must stay strictly nested after snapping
    if (params.overlap_mode == SceneGenParams::Mode::Nested) {
        for (std::size_t o = 0; o < placement.boxes.size(); ++o) {
            const int a = placement.anchor_of[o];
            if (a < 0) continue;
            const Vec3 ilo = out.boxes.boxes[o].min_corner();
            const Vec3 ihi = out.boxes.boxes[o].max_corner();
            const Vec3 olo = out.boxes.boxes[a].min_corner();
            const Vec3 ohi = out.boxes.boxes[a].max_corner();
            for (int k = 0; k < 3; ++k)
                if (!(ilo[k] > olo[k] && ihi[k] < ohi[k]))
                    throw std::runtime_error("placement failed: nested fit");
        }
    }

    if (params.segments_per_object > 0)
        add_segments(scene, out.boxes.boxes, object_points, params.segments_per_object);

    scene.validate();
    validate_boxes(out.boxes, scene);
    return out;
}

VoteSet simulate_votes(const SceneCloud& scene, const BoxAnnotationSet& boxes,
                       const Association& assoc, const VoteNoise& noise) {
    noise.validate();
    if (assoc.size() != scene.size())
        throw std::invalid_argument("simulate_votes: association does not match the scene");
    const int bg = scene.background_class();
    const int num_classes = static_cast<int>(scene.class_names.size());

    // dense fallback for undecided points, computed only when needed
    Association smallest;
    for (int tag : assoc.tag)
        if (tag == Association::kUndecided) {
            smallest = associate(scene, boxes, AssocStrategy::SmallestBox);
            break;
        }

    Rng rng(noise.seed);
    VoteSet out;
    out.votes.reserve(scene.size());
    out.expansion.reserve(scene.size());
    for (std::size_t p = 0; p < scene.size(); ++p) {
        const Vec3 cn{rng.normal(0.0, noise.center_sigma),
                      rng.normal(0.0, noise.center_sigma),
                      rng.normal(0.0, noise.center_sigma)};
        const Vec3 sn{rng.normal(0.0, noise.size_sigma),
                      rng.normal(0.0, noise.size_sigma),
                      rng.normal(0.0, noise.size_sigma)};
        const double score_n = rng.normal(0.0, noise.score_noise_sigma);
        const double flip_u = rng.uniform01();

        int tag = assoc.tag[p];
        if (tag == Association::kUndecided) tag = smallest.tag[p];

        Vote v;
        if (tag >= 0) {
            const Aabb& b = boxes.boxes[tag];
            v.box.center = b.center + cn;
            v.box.size = {b.size.x * std::exp(sn.x), b.size.y * std::exp(sn.y),
                          b.size.z * std::exp(sn.z)};
            int cls = b.label;
            if (flip_u < noise.sem_flip_prob && num_classes > 2) {
                // uniform over the other foreground classes
                std::uint64_t k = rng.uniform_index(num_classes - 2);
                for (int c = 1; c < num_classes; ++c) {
                    if (c == bg || c == b.label) continue;
                    if (k == 0) {
                        cls = c;
                        break;
                    }
                    --k;
                }
            }
            v.box.label = cls;
            v.semantic = cls;
            v.score = std::clamp(iou_aabb(v.box, b) + score_n, 1e-7, 1.0 - 1e-7);
        } else {
            v.box.center = scene.positions[p];
            v.box.size = {kMinBoxExtent, kMinBoxExtent, kMinBoxExtent};
            v.box.label = bg;
            v.semantic = bg;
            v.score = std::clamp(score_n, 1e-7, 1.0 - 1e-7);
        }
        out.votes.push_back(v);
        out.expansion.push_back({static_cast<int>(p)});
    }
    return out;
}

VotePrediction predictions_from_votes(const VoteSet& votes, const SceneCloud& scene,
                                      int num_classes) {
    if (votes.size() != scene.size())
        throw std::invalid_argument("predictions_from_votes: need one vote per point");
    VotePrediction pred;
    pred.num_classes = num_classes;
    pred.offset.reserve(scene.size());
    pred.size.reserve(scene.size());
    pred.iou.reserve(scene.size());
    pred.sem_probs.assign(scene.size() * static_cast<std::size_t>(num_classes), 0.0);
    for (std::size_t p = 0; p < scene.size(); ++p) {
        if (votes.expansion[p].size() != 1 ||
            votes.expansion[p][0] != static_cast<int>(p))
            throw std::invalid_argument(
                "predictions_from_votes: votes are not per-point in scene order");
        const Vote& v = votes.votes[p];
        pred.offset.push_back(v.box.center - scene.positions[p]);
        pred.size.push_back(v.box.size);
        pred.iou.push_back(v.score);
        if (v.semantic < 0 || v.semantic >= num_classes)
            throw std::invalid_argument("predictions_from_votes: semantic out of range");
        pred.sem_probs[p * num_classes + v.semantic] = 1.0;
    }
    return pred;
}

// ---------------------------------------------------------------------------
// JSON configs

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path + ": top level must be an object");
    return j;
}

double num_or(const json& j, const char* key, double dflt) {
    auto it = j.find(key);
    if (it == j.end()) return dflt;
    if (!it->is_number()) throw std::runtime_error(std::string(key) + " must be a number");
    return it->get<double>();
}

std::int64_t int_or(const json& j, const char* key, std::int64_t dflt) {
    auto it = j.find(key);
    if (it == j.end()) return dflt;
    if (!it->is_number_integer())
        throw std::runtime_error(std::string(key) + " must be an integer");
    return it->get<std::int64_t>();
}

}  // namespace

const char* mode_name(SceneGenParams::Mode mode) {
    switch (mode) {
        case SceneGenParams::Mode::None: return "none";
        case SceneGenParams::Mode::Nested: return "nested";
        case SceneGenParams::Mode::Touching: return "touching";
    }
    return "none";
}

SceneGenParams::Mode mode_from_name(const std::string& name) {
    if (name == "none") return SceneGenParams::Mode::None;
    if (name == "nested") return SceneGenParams::Mode::Nested;
    if (name == "touching") return SceneGenParams::Mode::Touching;
    throw std::invalid_argument("overlap_mode must be none, nested or touching (got \"" +
                                name + "\")");
}

SceneGenParams load_gen_params(const std::string& path) {
    const json j = read_json(path);
    SceneGenParams p;
    if (auto it = j.find("room"); it != j.end()) {
        if (!it->is_array() || it->size() != 3)
            throw std::runtime_error("room must be an array of 3 numbers");
        p.room = {(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>()};
    }
    p.num_objects = static_cast<int>(int_or(j, "num_objects", p.num_objects));
    if (auto it = j.find("class_size_ranges"); it != j.end()) {
        if (!it->is_array()) throw std::runtime_error("class_size_ranges must be an array");
        p.class_size_ranges.clear();
        for (const json& r : *it) {
            if (!r.is_array() || r.size() != 2)
                throw std::runtime_error("class_size_ranges entries must be [lo, hi]");
            p.class_size_ranges.push_back({r[0].get<double>(), r[1].get<double>()});
        }
    }
    p.points_per_object =
        static_cast<int>(int_or(j, "points_per_object", p.points_per_object));
    p.background_points =
        static_cast<int>(int_or(j, "background_points", p.background_points));
    if (auto it = j.find("overlap_mode"); it != j.end()) {
        if (!it->is_string()) throw std::runtime_error("overlap_mode must be a string");
        p.overlap_mode = mode_from_name(it->get<std::string>());
    }
    p.segments_per_object =
        static_cast<int>(int_or(j, "segments_per_object", p.segments_per_object));
    p.seed = static_cast<std::uint64_t>(int_or(j, "seed", 0));
    p.validate();
    return p;
}

VoteNoise load_vote_noise(const std::string& path) {
    const json j = read_json(path);
    VoteNoise n;
    n.center_sigma = num_or(j, "center_sigma", 0.0);
    n.size_sigma = num_or(j, "size_sigma", 0.0);
    n.score_noise_sigma = num_or(j, "score_noise_sigma", 0.0);
    n.sem_flip_prob = num_or(j, "sem_flip_prob", 0.0);
    n.seed = static_cast<std::uint64_t>(int_or(j, "seed", 0));
    n.validate();
    return n;
}

std::string gen_params_to_json(const SceneGenParams& p) {
    json j;
    j["room"] = {p.room.x, p.room.y, p.room.z};
    j["num_objects"] = p.num_objects;
    json ranges = json::array();
    for (const auto& r : p.class_size_ranges) ranges.push_back({r[0], r[1]});
    j["class_size_ranges"] = std::move(ranges);
    j["points_per_object"] = p.points_per_object;
    j["background_points"] = p.background_points;
    j["overlap_mode"] = mode_name(p.overlap_mode);
    j["segments_per_object"] = p.segments_per_object;
    j["seed"] = p.seed;
    return j.dump();
}

std::string vote_noise_to_json(const VoteNoise& n) {
    json j;
    j["center_sigma"] = n.center_sigma;
    j["size_sigma"] = n.size_sigma;
    j["score_noise_sigma"] = n.score_noise_sigma;
    j["sem_flip_prob"] = n.sem_flip_prob;
    j["seed"] = n.seed;
    return j.dump();
}

}  // namespace boxvote
