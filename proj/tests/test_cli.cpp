#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "boxvote/eval.hpp"
#include "boxvote/scene.hpp"
#include "helpers.hpp"

#ifndef BOXVOTE_CLI_PATH
#error "BOXVOTE_CLI_PATH must point at the command line binary"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path();
    const std::string out_path =
        (dir / ("cli_out_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++))).string();
    const std::string err_path = out_path + ".err";
    const std::string cmd = std::string(BOXVOTE_CLI_PATH) + " " + args + " > " +
                            out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testutil::read_file(out_path);
    r.err = testutil::read_file(err_path);
    std::filesystem::remove(out_path);
    std::filesystem::remove(err_path);
    return r;
}

}  // namespace

TEST_CASE("help exits cleanly, bad usage does not") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("cluster --help").exit_code == 0);
    CHECK(run_cli("").exit_code == 1);             // a subcommand is required
    CHECK(run_cli("frobnicate").exit_code == 1);   // unknown subcommand
    CHECK(run_cli("cluster").exit_code == 1);      // missing required options
    CHECK(run_cli("cluster --votes x.json --out y.json --no-such-flag").exit_code ==
          1);
}

TEST_CASE("tau validation rejects out-of-range thresholds") {
    const auto dir = testutil::temp_dir();
    const RunResult sim =
        run_cli("simulate --seed 3 --num-scenes 1 --out " + (dir / "s").string());
    REQUIRE(sim.exit_code == 0);
    const std::string votes = (dir / "s" / "votes_000.json").string();
    const RunResult r = run_cli("cluster --votes " + votes + " --tau 1.5 --out " +
                                (dir / "c.json").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("tau must be in (0,1)") != std::string::npos);
    CHECK(run_cli("cluster --votes " + votes + " --tau 0 --out " +
                  (dir / "c.json").string())
              .exit_code == 1);
}

TEST_CASE("data errors exit with status two") {
    const auto dir = testutil::temp_dir();
    CHECK(run_cli("eval --pred nope.json --scene nope.json --out " +
                  (dir / "r.json").string())
              .exit_code == 2);
    const std::string bad = (dir / "bad.json").string();
    testutil::write_file(bad, "{broken");
    CHECK(run_cli("cluster --votes " + bad + " --out " + (dir / "c.json").string())
              .exit_code == 2);
}

TEST_CASE("every run prints its resolved configuration and seed") {
    const auto dir = testutil::temp_dir();
    const std::string scenes = (dir / "s").string();
    REQUIRE(run_cli("simulate --seed 5 --num-scenes 1 --out " + scenes).exit_code ==
            0);
    const std::string scene = scenes + "/scene_000.json";
    const std::string votes = scenes + "/votes_000.json";

    const std::vector<std::string> cmds = {
        "genlabels --scene " + scene + " --out " + (dir / "l.json").string(),
        "cluster --votes " + votes + " --out " + (dir / "c.json").string(),
        "eval --pred " + (dir / "m.json").string() + " --scene " + scene +
            " --out " + (dir / "r.json").string(),
        "pipeline --scene " + scene + " --out " + (dir / "p.json").string(),
    };
    // Prepare masks for eval.
    REQUIRE(run_cli("cluster --votes " + votes + " --out " +
                    (dir / "c.json").string())
                .exit_code == 0);
    REQUIRE(run_cli("segment --votes " + votes + " --clusters " +
                    (dir / "c.json").string() + " --out " +
                    (dir / "m.json").string())
                .exit_code == 0);
    for (const std::string& cmd : cmds) {
        const RunResult r = run_cli(cmd);
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("config:") != std::string::npos);
        CHECK(r.out.find("seed") != std::string::npos);
    }
}

TEST_CASE("the full command chain reproduces ground truth without noise") {
    const auto dir = testutil::temp_dir();
    const std::string scenes = (dir / "s").string();
    REQUIRE(run_cli("simulate --seed 11 --num-scenes 1 --out " + scenes).exit_code ==
            0);
    const std::string scene = scenes + "/scene_000.json";
    const std::string votes = scenes + "/votes_000.json";

    REQUIRE(run_cli("cluster --votes " + votes + " --tau 0.3 --out " +
                    (dir / "c.json").string())
                .exit_code == 0);
    REQUIRE(run_cli("segment --votes " + votes + " --clusters " +
                    (dir / "c.json").string() + " --out " + (dir / "m.json").string() +
                    " --ply " + (dir / "m.ply").string() + " --scene " + scene)
                .exit_code == 0);
    const RunResult ev = run_cli("eval --pred " + (dir / "m.json").string() +
                                 " --scene " + scene + " --out " +
                                 (dir / "r.json").string());
    REQUIRE(ev.exit_code == 0);
    CHECK(ev.out.find("mean") != std::string::npos);

    const std::string report = testutil::read_file((dir / "r.json").string());
    CHECK(report.find("\"mAP50\": 1.0") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "m.ply"));

    // Detection-proxy evaluation runs on the same inputs.
    CHECK(run_cli("eval --pred " + (dir / "m.json").string() + " --scene " + scene +
                  " --detection-proxy --out " + (dir / "rd.json").string())
              .exit_code == 0);

    // The degrade command round-trips box files.
    const std::string boxes_file = (dir / "b.json").string();
    boxvote::BoxAnnotationSet boxes;
    boxvote::load_scene_json(scene, &boxes);
    boxvote::save_boxes_json(boxes_file, boxes);
    REQUIRE(run_cli("degrade --boxes " + boxes_file +
                    " --drop 0.5 --jitter 0.05 --seed 2 --out " +
                    (dir / "bd.json").string())
                .exit_code == 0);
    CHECK(boxvote::load_boxes_json((dir / "bd.json").string()).size() <=
          boxes.size());

    // Baseline masks evaluate against the same scene.
    REQUIRE(run_cli("baseline --votes " + votes + " --scene " + scene + " --out " +
                    (dir / "bl.json").string())
                .exit_code == 0);
    CHECK(run_cli("eval --pred " + (dir / "bl.json").string() + " --scene " + scene +
                  " --out " + (dir / "rb.json").string())
              .exit_code == 0);
}

TEST_CASE("sweeps emit well-formed csv") {
    const auto dir = testutil::temp_dir();
    const std::string scenes = (dir / "s").string();
    const std::string gen = (dir / "gen.json").string();
    testutil::write_file(
        gen, R"({"num_objects":4,"points_per_object":120,"background_points":200})");
    REQUIRE(run_cli("simulate --gen-config " + gen +
                    " --seed 9 --num-scenes 2 --out " + scenes)
                .exit_code == 0);

    const std::string csv = (dir / "sweep.csv").string();
    REQUIRE(run_cli("sweep-tau --scene-dir " + scenes +
                    " --taus 0.1:0.1:0.9 --out " + csv)
                .exit_code == 0);
    std::ifstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "tau,mAP25,mAP50");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 9);

    const std::string dcsv = (dir / "degrade.csv").string();
    REQUIRE(run_cli("sweep-degrade --scene-dir " + scenes +
                    " --jitters 0,0.1 --drops 0,0.2 --seed 1 --out " + dcsv)
                .exit_code == 0);
    std::ifstream din(dcsv);
    REQUIRE(std::getline(din, line));
    CHECK(line == "jitter,drop,mAP25,mAP50");
    rows = 0;
    while (std::getline(din, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("parallel sweeps match the single-worker results") {
    const auto dir = testutil::temp_dir();
    const std::string scenes = (dir / "s").string();
    const std::string gen = (dir / "gen.json").string();
    testutil::write_file(
        gen, R"({"num_objects":3,"points_per_object":100,"background_points":150})");
    REQUIRE(run_cli("simulate --gen-config " + gen +
                    " --seed 4 --num-scenes 3 --out " + scenes)
                .exit_code == 0);
    const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    REQUIRE(run_cli("sweep-tau --scene-dir " + scenes +
                    " --taus 0.2:0.2:0.6 --jobs 1 --out " + a)
                .exit_code == 0);
    REQUIRE(run_cli("sweep-tau --scene-dir " + scenes +
                    " --taus 0.2:0.2:0.6 --jobs 3 --out " + b)
                .exit_code == 0);
    CHECK(testutil::read_file(a) == testutil::read_file(b));
}

TEST_CASE("reruns with the same seed are byte identical") {
    const auto dir = testutil::temp_dir();
    const std::string s1 = (dir / "s1").string(), s2 = (dir / "s2").string();
    REQUIRE(run_cli("simulate --seed 21 --num-scenes 2 --out " + s1).exit_code == 0);
    REQUIRE(run_cli("simulate --seed 21 --num-scenes 2 --out " + s2).exit_code == 0);
    for (const char* name :
         {"scene_000.json", "votes_000.json", "scene_001.json", "votes_001.json"})
        CHECK(testutil::read_file(s1 + "/" + name) ==
              testutil::read_file(s2 + "/" + name));
}
