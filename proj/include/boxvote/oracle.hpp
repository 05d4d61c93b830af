#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "boxvote/losses.hpp"
#include "boxvote/scene.hpp"
#include "boxvote/votes.hpp"
#include "boxvote/weaklabel.hpp"

namespace boxvote {

// Synthetic-scene recipe. Objects are uniform point samples inside boxes
// placed according to overlap_mode:
//   none     - pairwise separated boxes (0.45 m margin, same wall clearance)
//   nested   - objects come in pairs, the second strictly inside the first
//   touching - same-class pairs of differing sizes with intersecting boxes
//              and nearby centers
struct SceneGenParams {
    Vec3 room{8.0, 8.0, 3.0};
    int num_objects = 10;
    // one [lo, hi] extent range per foreground class; classes assigned
    // round-robin
    std::vector<std::array<double, 2>> class_size_ranges{{0.4, 0.9}, {0.5, 1.1}};
    int points_per_object = 2000;
    int background_points = 20000;
    enum class Mode { None, Nested, Touching };
    Mode overlap_mode = Mode::None;
    // > 0 creates spatially coherent per-object chunks (roughly this many per
    // object) and per-point ids for background; 0 leaves segments absent
    int segments_per_object = 0;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// Error model standing in for a trained network's vote heads.
struct VoteNoise {
    double center_sigma = 0.0;       // m, additive Gaussian on box centers
    double size_sigma = 0.0;         // log-scale Gaussian, multiplicative on sizes
    double score_noise_sigma = 0.0;  // additive Gaussian on the IoU estimate
    double sem_flip_prob = 0.0;      // chance of predicting a different class
    std::uint64_t seed = 0;

    void validate() const;
};

struct GeneratedScene {
    SceneCloud scene;
    BoxAnnotationSet boxes;
};

// Deterministic per seed; throws std::runtime_error("placement failed") when
// boxes cannot be placed within the retry budget.
GeneratedScene gen_scene(const SceneGenParams& params);

// One vote per point. Foreground points vote their associated box under the
// noise model, with the predicted-vs-associated box IoU (plus noise, clamped
// to (0,1)) as score; undecided points fall back to their smallest containing
// box; background points cast a degenerate background-class vote.
VoteSet simulate_votes(const SceneCloud& scene, const BoxAnnotationSet& boxes,
                       const Association& assoc, const VoteNoise& noise);

// Reinterprets per-point votes as prediction arrays (one-hot semantics).
VotePrediction predictions_from_votes(const VoteSet& votes, const SceneCloud& scene,
                                      int num_classes);

SceneGenParams load_gen_params(const std::string& path);
VoteNoise load_vote_noise(const std::string& path);
std::string gen_params_to_json(const SceneGenParams& params);
std::string vote_noise_to_json(const VoteNoise& noise);

const char* mode_name(SceneGenParams::Mode mode);
SceneGenParams::Mode mode_from_name(const std::string& name);

}  // namespace boxvote
