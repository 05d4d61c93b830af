#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "boxvote/pipeline.hpp"
#include "boxvote/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace boxvote;

namespace {

AssocStrategy strategy_from_name(const std::string& s) {
    if (s == "decided") return AssocStrategy::DecidedOnly;
    if (s == "closest") return AssocStrategy::ClosestBox;
    if (s == "smallest") return AssocStrategy::SmallestBox;
    throw std::invalid_argument("strategy must be decided, closest or smallest (got \"" +
                                s + "\")");
}

PipelineParams::Algo algo_from_name(const std::string& s) {
    if (s == "nmc") return PipelineParams::Algo::Nmc;
    if (s == "sc") return PipelineParams::Algo::Sc;
    throw std::invalid_argument("algo must be nmc or sc (got \"" + s + "\")");
}

void check_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in (0,1)");
}

void print_config(json j) {
    std::cout << "config: " << j.dump() << "\n";
}

// "0.1:0.1:0.9" -> {0.1, 0.2, ..., 0.9}
std::vector<double> parse_range(const std::string& text) {
    double a = 0, step = 0, b = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &step, &b) != 3)
        throw std::invalid_argument("range must look like start:step:stop (got \"" +
                                    text + "\")");
    if (!(step > 0) || b < a)
        throw std::invalid_argument("range needs step > 0 and stop >= start");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
    for (int k = 0; k < n; ++k) out.push_back(a + k * step);
    return out;
}

// "0,0.05,0.1" -> {0, 0.05, 0.1}
std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad number \"" + tok + "\" in list \"" + text +
                                        "\"");
        }
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

// Sorted scene files (scene*.json) under dir.
std::vector<std::string> list_scene_files(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw std::runtime_error(dir + " is not a directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("scene", 0) == 0 && entry.path().extension() == ".json")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::runtime_error("no scene*.json files in " + dir);
    return files;
}

// Index-deterministic parallel map: results identical for any job count.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < std::min(jobs, n); ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

BoxAnnotationSet boxes_of_scene(const std::string& path, SceneCloud& scene) {
    BoxAnnotationSet boxes;
    scene = load_scene_json(path, &boxes);
    if (boxes.empty())
        throw std::runtime_error(path + ": scene has no annotation boxes");
    return boxes;
}

std::string zero_pad(int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*d", width, value);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "boxvote: weak labels from 3D boxes, vote clustering, instance masks and "
        "benchmarks"};
    app.require_subcommand(1);

    // ---- genlabels ----
    auto* genlabels = app.add_subcommand(
        "genlabels", "Derive per-point labels and training targets from boxes");
    std::string gl_scene, gl_boxes_from = "scene", gl_boxes, gl_strategy = "smallest",
                gl_out;
    genlabels->add_option("--scene", gl_scene, "scene json")->required();
    genlabels->add_option("--boxes-from", gl_boxes_from,
                          "where boxes come from: file or scene (default scene)");
    genlabels->add_option("--boxes", gl_boxes, "boxes json (with --boxes-from file)");
    genlabels->add_option("--strategy", gl_strategy,
                          "decided | closest | smallest (default smallest)");
    genlabels->add_option("--out", gl_out, "output labels json")->required();

    // ---- simulate ----
    auto* simulate = app.add_subcommand(
        "simulate", "Generate synthetic scenes and simulated votes");
    std::string sim_gen_cfg, sim_noise_cfg, sim_out, sim_strategy = "smallest";
    std::uint64_t sim_seed = 0;
    int sim_num = 1, sim_jobs = 1;
    simulate->add_option("--gen-config", sim_gen_cfg, "scene generation json config");
    simulate->add_option("--noise-config", sim_noise_cfg, "vote noise json config");
    simulate->add_option("--seed", sim_seed, "master seed (default 0)");
    simulate->add_option("--num-scenes", sim_num, "how many scenes (default 1)");
    simulate->add_option("--strategy", sim_strategy,
                         "association strategy for the simulated votes");
    simulate->add_option("--jobs", sim_jobs, "parallel scene workers (default 1)");
    simulate->add_option("--out", sim_out, "output directory")->required();

    // ---- cluster ----
    auto* cluster_cmd = app.add_subcommand("cluster", "Cluster a vote set");
    std::string cl_votes, cl_algo = "nmc", cl_out;
    double cl_tau = 0.3, cl_radius = 0.1;
    bool cl_per_sem = false;
    cluster_cmd->add_option("--votes", cl_votes, "votes json")->required();
    cluster_cmd->add_option("--tau", cl_tau,
                            "box-IoU threshold in (0,1), default 0.3 (house default)");
    cluster_cmd->add_flag("--per-semantic", cl_per_sem, "cluster each class separately");
    cluster_cmd->add_option("--algo", cl_algo, "nmc | sc (default nmc)");
    cluster_cmd->add_option("--radius", cl_radius, "sc center radius in m (default 0.1)");
    cluster_cmd->add_option("--out", cl_out, "output clusters json")->required();

    // ---- segment ----
    auto* segment = app.add_subcommand(
        "segment", "Back-project clustered votes to instance masks");
    std::string sg_votes, sg_clusters, sg_out, sg_ply, sg_scene;
    std::uint64_t sg_color_seed = 0;
    segment->add_option("--votes", sg_votes, "votes json")->required();
    segment->add_option("--clusters", sg_clusters, "clusters json")->required();
    segment->add_option("--out", sg_out, "output masks json")->required();
    segment->add_option("--ply", sg_ply, "optional colored ply export");
    segment->add_option("--scene", sg_scene, "scene json (required with --ply)");
    segment->add_option("--color-seed", sg_color_seed, "mask color seed (default 0)");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate masks against scene GT");
    std::string ev_pred, ev_scene, ev_out;
    bool ev_proxy = false;
    eval_cmd->add_option("--pred", ev_pred, "predicted masks json")->required();
    eval_cmd->add_option("--scene", ev_scene, "scene json with GT")->required();
    eval_cmd->add_flag("--detection-proxy", ev_proxy,
                       "fit boxes to masks and match by box IoU");
    eval_cmd->add_option("--out", ev_out, "output report json")->required();

    // ---- degrade ----
    auto* degrade = app.add_subcommand("degrade", "Drop and jitter annotation boxes");
    std::string dg_boxes, dg_out;
    double dg_drop = 0.0, dg_jitter = 0.0;
    std::uint64_t dg_seed = 0;
    degrade->add_option("--boxes", dg_boxes, "boxes json")->required();
    degrade->add_option("--drop", dg_drop, "drop probability in [0,1] (default 0)");
    degrade->add_option("--jitter", dg_jitter, "max corner jitter in m (default 0)");
    degrade->add_option("--seed", dg_seed, "seed (default 0)");
    degrade->add_option("--out", dg_out, "output boxes json")->required();

    // ---- baseline ----
    auto* baseline = app.add_subcommand(
        "baseline", "Detect boxes by NMS over votes, then segment by containment");
    std::string bl_votes, bl_scene, bl_strategy = "decided", bl_out;
    double bl_nms = 0.25;
    baseline->add_option("--votes", bl_votes, "votes json")->required();
    baseline->add_option("--scene", bl_scene, "scene json")->required();
    baseline->add_option("--nms", bl_nms, "NMS IoU threshold (default 0.25)");
    baseline->add_option("--strategy", bl_strategy,
                         "association strategy for detected boxes (default decided)");
    baseline->add_option("--out", bl_out, "output masks json")->required();

    // ---- pipeline ----
    auto* pipeline = app.add_subcommand(
        "pipeline", "Full chain: labels, votes, clustering, masks, report");
    std::string pl_scene, pl_noise_cfg, pl_strategy = "smallest", pl_algo = "nmc",
                pl_out, pl_masks;
    double pl_tau = 0.3, pl_radius = 0.1;
    bool pl_per_sem = false;
    bool pl_seed_given = false;
    std::uint64_t pl_seed = 0;
    pipeline->add_option("--scene", pl_scene, "scene json with boxes and GT")->required();
    pipeline->add_option("--noise", pl_noise_cfg, "vote noise json config");
    pipeline->add_option("--tau", pl_tau,
                         "box-IoU threshold in (0,1), default 0.3 (house default)");
    pipeline->add_option("--strategy", pl_strategy, "association strategy");
    pipeline->add_option("--algo", pl_algo, "nmc | sc (default nmc)");
    pipeline->add_option("--radius", pl_radius, "sc radius (default 0.1)");
    pipeline->add_flag("--per-semantic", pl_per_sem, "cluster each class separately");
    pipeline
        ->add_option("--seed", pl_seed, "override the noise config seed")
        ->each([&](const std::string&) { pl_seed_given = true; });
    pipeline->add_option("--out", pl_out, "output report json")->required();
    pipeline->add_option("--masks", pl_masks, "optional masks json output");

    // ---- sweep-tau ----
    auto* sweep_tau = app.add_subcommand(
        "sweep-tau", "Clustering threshold sweep over a scene directory");
    std::string st_dir, st_taus = "0.1:0.1:0.9", st_noise_cfg, st_out,
                st_strategy = "smallest";
    int st_jobs = 1;
    sweep_tau->add_option("--scene-dir", st_dir, "directory of scene*.json")->required();
    sweep_tau->add_option("--taus", st_taus, "start:step:stop (default 0.1:0.1:0.9)");
    sweep_tau->add_option("--noise", st_noise_cfg, "vote noise json config");
    sweep_tau->add_option("--strategy", st_strategy, "association strategy");
    sweep_tau->add_option("--jobs", st_jobs, "parallel scene workers (default 1)");
    sweep_tau->add_option("--out", st_out, "output csv")->required();

    // ---- sweep-degrade ----
    auto* sweep_deg = app.add_subcommand(
        "sweep-degrade",
        "Label quality under box dropping and corner jitter, over a scene directory");
    std::string sd_dir, sd_jitters = "0,0.05,0.1,0.2", sd_drops = "0,0.05,0.1",
                sd_strategy = "smallest", sd_out;
    std::uint64_t sd_seed = 0;
    int sd_jobs = 1;
    sweep_deg->add_option("--scene-dir", sd_dir, "directory of scene*.json")->required();
    sweep_deg->add_option("--jitters", sd_jitters, "comma list of corner jitters (m)");
    sweep_deg->add_option("--drops", sd_drops, "comma list of drop rates");
    sweep_deg->add_option("--seed", sd_seed, "degradation seed (default 0)");
    sweep_deg->add_option("--strategy", sd_strategy, "association strategy");
    sweep_deg->add_option("--jobs", sd_jobs, "parallel scene workers (default 1)");
    sweep_deg->add_option("--out", sd_out, "output csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(genlabels)) {
            const AssocStrategy strategy = strategy_from_name(gl_strategy);
            if (gl_boxes_from != "file" && gl_boxes_from != "scene")
                throw std::invalid_argument("--boxes-from must be file or scene");
            if (gl_boxes_from == "file" && gl_boxes.empty())
                throw std::invalid_argument("--boxes is required with --boxes-from file");
            print_config({{"command", "genlabels"},
                          {"scene", gl_scene},
                          {"boxes_from", gl_boxes_from},
                          {"boxes", gl_boxes},
                          {"strategy", gl_strategy},
                          {"seed", 0},
                          {"out", gl_out}});

            SceneCloud scene;
            BoxAnnotationSet boxes;
            if (gl_boxes_from == "scene") {
                boxes = boxes_of_scene(gl_scene, scene);
            } else {
                scene = load_scene_json(gl_scene);
                boxes = load_boxes_json(gl_boxes);
                validate_boxes(boxes, scene);
            }
            const Association assoc = associate(scene, boxes, strategy);
            const TrainingTargets targets = make_targets(assoc, scene, boxes);

            json offsets = json::array(), sizes = json::array();
            for (std::size_t p = 0; p < scene.size(); ++p) {
                offsets.push_back(
                    {targets.offset[p].x, targets.offset[p].y, targets.offset[p].z});
                sizes.push_back(
                    {targets.size[p].x, targets.size[p].y, targets.size[p].z});
            }
            json j;
            j["strategy"] = gl_strategy;
            j["undecided_fraction"] = undecided_fraction(assoc);
            j["tags"] = assoc.tag;
            j["targets"] =
                json{{"offset", std::move(offsets)}, {"size", std::move(sizes)},
                     {"sem", targets.sem}};
            std::ofstream out(gl_out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open " + gl_out + " for writing");
            out << j.dump() << "\n";
            if (!out) throw std::runtime_error("failed writing " + gl_out);
        } else if (app.got_subcommand(simulate)) {
            const AssocStrategy strategy = strategy_from_name(sim_strategy);
            SceneGenParams gen;
            if (!sim_gen_cfg.empty()) gen = load_gen_params(sim_gen_cfg);
            VoteNoise noise;
            if (!sim_noise_cfg.empty()) noise = load_vote_noise(sim_noise_cfg);
            if (sim_num < 1) throw std::invalid_argument("--num-scenes must be >= 1");
            print_config({{"command", "simulate"},
                          {"gen", json::parse(gen_params_to_json(gen))},
                          {"noise", json::parse(vote_noise_to_json(noise))},
                          {"seed", sim_seed},
                          {"num_scenes", sim_num},
                          {"strategy", sim_strategy},
                          {"out", sim_out}});
            fs::create_directories(sim_out);
            parallel_for(sim_num, sim_jobs, [&](int i) {
                SceneGenParams g = gen;
                VoteNoise n = noise;
                g.seed = Rng::derive(sim_seed, 2 * i);
                n.seed = Rng::derive(sim_seed, 2 * i + 1);
                const GeneratedScene gs = gen_scene(g);
                const Association assoc = associate(gs.scene, gs.boxes, strategy);
                const VoteSet votes = simulate_votes(gs.scene, gs.boxes, assoc, n);
                const std::string tag = zero_pad(i, 3);
                save_scene_json(sim_out + "/scene_" + tag + ".json", gs.scene, &gs.boxes);
                save_votes_json(sim_out + "/votes_" + tag + ".json", votes);
            });
        } else if (app.got_subcommand(cluster_cmd)) {
            check_tau(cl_tau);
            if (!(cl_radius > 0)) throw std::invalid_argument("radius must be > 0");
            PipelineParams params;
            params.algo = algo_from_name(cl_algo);
            params.tau = cl_tau;
            params.sc_radius = cl_radius;
            params.per_semantic = cl_per_sem;
            print_config({{"command", "cluster"},
                          {"votes", cl_votes},
                          {"tau", cl_tau},
                          {"algo", cl_algo},
                          {"radius", cl_radius},
                          {"per_semantic", cl_per_sem},
                          {"seed", 0},
                          {"out", cl_out}});
            const VoteSet votes = load_votes_json(cl_votes);
            save_clustering_json(cl_out, make_clusterer(params)(votes));
        } else if (app.got_subcommand(segment)) {
            if (!sg_ply.empty() && sg_scene.empty())
                throw std::invalid_argument("--scene is required with --ply");
            print_config({{"command", "segment"},
                          {"votes", sg_votes},
                          {"clusters", sg_clusters},
                          {"out", sg_out},
                          {"ply", sg_ply},
                          {"color_seed", sg_color_seed}});
            const VoteSet votes = load_votes_json(sg_votes);
            const Clustering clustering = load_clustering_json(sg_clusters);
            const std::vector<InstanceMask> masks = back_project(clustering, votes);
            save_masks_json(sg_out, masks);
            if (!sg_ply.empty()) {
                const SceneCloud scene = load_scene_json(sg_scene);
                save_masks_ply(sg_ply, scene, masks, sg_color_seed);
            }
        } else if (app.got_subcommand(eval_cmd)) {
            print_config({{"command", "eval"},
                          {"pred", ev_pred},
                          {"scene", ev_scene},
                          {"detection_proxy", ev_proxy},
                          {"seed", 0},
                          {"out", ev_out}});
            const SceneCloud scene = load_scene_json(ev_scene);
            const std::vector<InstanceMask> preds = load_masks_json(ev_pred);
            const std::vector<InstanceMask> gts = gt_masks(scene);
            const EvalReport report = ev_proxy
                                          ? evaluate_detection(preds, gts, scene, {})
                                          : evaluate(preds, gts, {});
            save_report_json(ev_out, report, scene.class_names);
            std::cout << report_table(report, scene.class_names);
        } else if (app.got_subcommand(degrade)) {
            if (dg_drop < 0 || dg_drop > 1)
                throw std::invalid_argument("drop rate must be in [0,1]");
            if (dg_jitter < 0) throw std::invalid_argument("jitter must be >= 0");
            print_config({{"command", "degrade"},
                          {"boxes", dg_boxes},
                          {"drop", dg_drop},
                          {"jitter", dg_jitter},
                          {"seed", dg_seed},
                          {"out", dg_out}});
            const BoxAnnotationSet boxes = load_boxes_json(dg_boxes);
            save_boxes_json(dg_out,
                            degrade_annotations(boxes, dg_drop, dg_jitter, dg_seed));
        } else if (app.got_subcommand(baseline)) {
            const AssocStrategy strategy = strategy_from_name(bl_strategy);
            if (!(bl_nms > 0 && bl_nms < 1))
                throw std::invalid_argument("nms threshold must be in (0,1)");
            print_config({{"command", "baseline"},
                          {"votes", bl_votes},
                          {"scene", bl_scene},
                          {"nms", bl_nms},
                          {"strategy", bl_strategy},
                          {"seed", 0},
                          {"out", bl_out}});
            const SceneCloud scene = load_scene_json(bl_scene);
            const VoteSet votes = load_votes_json(bl_votes);
            save_masks_json(bl_out, detector_baseline(votes, scene, bl_nms, strategy));
        } else if (app.got_subcommand(pipeline)) {
            check_tau(pl_tau);
            if (!(pl_radius > 0)) throw std::invalid_argument("radius must be > 0");
            PipelineParams params;
            params.strategy = strategy_from_name(pl_strategy);
            params.algo = algo_from_name(pl_algo);
            params.tau = pl_tau;
            params.sc_radius = pl_radius;
            params.per_semantic = pl_per_sem;
            if (!pl_noise_cfg.empty()) params.noise = load_vote_noise(pl_noise_cfg);
            if (pl_seed_given) params.noise.seed = pl_seed;
            print_config({{"command", "pipeline"},
                          {"scene", pl_scene},
                          {"noise", json::parse(vote_noise_to_json(params.noise))},
                          {"tau", pl_tau},
                          {"strategy", pl_strategy},
                          {"algo", pl_algo},
                          {"radius", pl_radius},
                          {"per_semantic", pl_per_sem},
                          {"seed", params.noise.seed},
                          {"out", pl_out}});
            SceneCloud scene;
            const BoxAnnotationSet boxes = boxes_of_scene(pl_scene, scene);
            const PipelineResult result = run_pipeline(scene, boxes, params);
            save_report_json(pl_out, result.report, scene.class_names);
            if (!pl_masks.empty()) save_masks_json(pl_masks, result.masks);
            std::cout << report_table(result.report, scene.class_names);
        } else if (app.got_subcommand(sweep_tau)) {
            const AssocStrategy strategy = strategy_from_name(st_strategy);
            const std::vector<double> taus = parse_range(st_taus);
            for (double t : taus) check_tau(t);
            VoteNoise noise;
            if (!st_noise_cfg.empty()) noise = load_vote_noise(st_noise_cfg);
            print_config({{"command", "sweep-tau"},
                          {"scene_dir", st_dir},
                          {"taus", taus},
                          {"noise", json::parse(vote_noise_to_json(noise))},
                          {"strategy", st_strategy},
                          {"out", st_out}});
            const std::vector<std::string> files = list_scene_files(st_dir);

            std::vector<SceneCloud> scenes(files.size());
            std::vector<BoxAnnotationSet> boxes(files.size());
            parallel_for(static_cast<int>(files.size()), st_jobs, [&](int i) {
                boxes[i] = boxes_of_scene(files[i], scenes[i]);
            });

            std::string csv = "tau,mAP25,mAP50\n";
            for (double tau : taus) {
                std::vector<double> m25(files.size()), m50(files.size());
                parallel_for(static_cast<int>(files.size()), st_jobs, [&](int i) {
                    PipelineParams params;
                    params.strategy = strategy;
                    params.tau = tau;
                    params.noise = noise;
                    params.noise.seed = Rng::derive(noise.seed, i);
                    const PipelineResult r = run_pipeline(scenes[i], boxes[i], params);
                    m25[i] = r.report.map25;
                    m50[i] = r.report.map50;
                });
                double s25 = 0, s50 = 0;
                for (std::size_t i = 0; i < files.size(); ++i) s25 += m25[i], s50 += m50[i];
                char line[96];
                std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n", tau,
                              s25 / files.size(), s50 / files.size());
                csv += line;
            }
            std::ofstream out(st_out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open " + st_out + " for writing");
            out << csv;
            if (!out) throw std::runtime_error("failed writing " + st_out);
        } else if (app.got_subcommand(sweep_deg)) {
            const AssocStrategy strategy = strategy_from_name(sd_strategy);
            const std::vector<double> jitters = parse_list(sd_jitters);
            const std::vector<double> drops = parse_list(sd_drops);
            for (double j : jitters)
                if (j < 0) throw std::invalid_argument("jitters must be >= 0");
            for (double d : drops)
                if (d < 0 || d > 1)
                    throw std::invalid_argument("drop rates must be in [0,1]");
            print_config({{"command", "sweep-degrade"},
                          {"scene_dir", sd_dir},
                          {"jitters", jitters},
                          {"drops", drops},
                          {"seed", sd_seed},
                          {"strategy", sd_strategy},
                          {"out", sd_out}});
            const std::vector<std::string> files = list_scene_files(sd_dir);

            std::vector<SceneCloud> scenes(files.size());
            std::vector<BoxAnnotationSet> boxes(files.size());
            parallel_for(static_cast<int>(files.size()), sd_jobs, [&](int i) {
                boxes[i] = boxes_of_scene(files[i], scenes[i]);
            });

            std::string csv = "jitter,drop,mAP25,mAP50\n";
            for (double jitter : jitters)
                for (double drop : drops) {
                    std::vector<double> m25(files.size()), m50(files.size());
                    parallel_for(static_cast<int>(files.size()), sd_jobs, [&](int i) {
                        const BoxAnnotationSet degraded = degrade_annotations(
                            boxes[i], drop, jitter, Rng::derive(sd_seed, i));
                        const EvalReport r =
                            label_quality(scenes[i], degraded, strategy);
                        m25[i] = r.map25;
                        m50[i] = r.map50;
                    });
                    double s25 = 0, s50 = 0;
                    for (std::size_t i = 0; i < files.size(); ++i)
                        s25 += m25[i], s50 += m50[i];
                    char line[128];
                    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f\n", jitter,
                                  drop, s25 / files.size(), s50 / files.size());
                    csv += line;
                }
            std::ofstream out(sd_out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open " + sd_out + " for writing");
            out << csv;
            if (!out) throw std::runtime_error("failed writing " + sd_out);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
