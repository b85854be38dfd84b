#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "cilab_cli/cli.hpp"
#include "test_util.hpp"

using cilab::testing::TempDir;

namespace {

int run_cli(std::initializer_list<std::string> args) {
    std::vector<std::string> owned{"cilab"};
    owned.insert(owned.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(owned.size());
    for (const auto& a : owned) argv.push_back(a.c_str());
    return cilab::cli::run(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({"generate", "--help"}) == 0);
    CHECK(run_cli({}) == 1);                        // a subcommand is required
    CHECK(run_cli({"frobnicate"}) == 1);            // unknown subcommand
    CHECK(run_cli({"generate"}) == 1);              // missing required --out
    CHECK(run_cli({"generate", "--out", "x.cip", "--grid", "0"}) == 1); // bad range
    CHECK(run_cli({"energy", "--in", "x.cip", "--bogus"}) == 1);
}

TEST_CASE("runtime failures exit with code two") {
    TempDir tmp("cli-fail");
    CHECK(run_cli({"energy", "--in", (tmp / "absent.cip").string()}) == 2);

    std::ofstream((tmp / "broken.json")) << "{ not json";
    CHECK(run_cli({"train", "--config", (tmp / "broken.json").string(),
                   "--train-data", (tmp / "a.cip").string(),
                   "--val-data", (tmp / "a.cip").string(),
                   "--out-dir", (tmp / "run").string()}) == 2);
}

TEST_CASE("the full pipeline runs end to end through the command line") {
    TempDir tmp("cli-pipeline");
    const std::string data = (tmp / "d.cip").string();

    CHECK(run_cli({"generate", "--out", data, "--grid", "16", "--samples", "12",
                   "--steps", "10", "--seed", "7"}) == 0);
    REQUIRE(std::filesystem::exists(data));
    CHECK(std::filesystem::exists(tmp / "d.meta.json"));

    CHECK(run_cli({"energy", "--in", data}) == 0);

    CHECK(run_cli({"simulate", "--in", data, "--steps", "10", "--record-every", "5",
                   "--out", (tmp / "traj").string()}) == 0);
    CHECK(std::filesystem::exists(tmp / "traj/step_000000.cip"));
    CHECK(std::filesystem::exists(tmp / "traj/step_000005.cip"));
    CHECK(std::filesystem::exists(tmp / "traj/step_000010.cip"));

    std::ofstream((tmp / "cfg.json"))
        << R"({"max_iters": 2, "checkpoint_every": 1, "seed": 3, "weights": {"s_steps": 10}})";
    CHECK(run_cli({"train", "--config", (tmp / "cfg.json").string(),
                   "--train-data", data, "--val-data", data,
                   "--out-dir", (tmp / "run").string(), "--deterministic"}) == 0);
    REQUIRE(std::filesystem::exists(tmp / "run/best_checkpoint.json"));
    CHECK(std::filesystem::exists(tmp / "run/train_log.txt"));
    CHECK(std::filesystem::exists(tmp / "run/train_report.json"));
    REQUIRE(std::filesystem::exists(tmp / "run/ckpt-000002.ckpt"));

    const std::string ckpt = (tmp / "run/ckpt-000002.ckpt").string();
    CHECK(run_cli({"eval", "--checkpoint", ckpt, "--data", data,
                   "--report", (tmp / "report.json").string(),
                   "--csv", (tmp / "maes.csv").string(),
                   "--triptychs", "2", "--out-dir", (tmp / "figs").string()}) == 0);
    CHECK(std::filesystem::exists(tmp / "report.json"));
    CHECK(std::filesystem::exists(tmp / "maes.csv"));
    CHECK(std::filesystem::exists(tmp / "figs/triptych_000001.png"));

    CHECK(run_cli({"render", "--data", data, "--index", "0",
                   "--checkpoint", ckpt, "--out", (tmp / "trip.png").string()}) == 0);
    CHECK(std::filesystem::exists(tmp / "trip.png"));

    // Figures without a directory to put them in is a configuration error.
    CHECK(run_cli({"eval", "--checkpoint", ckpt, "--data", data,
                   "--report", (tmp / "r2.json").string(), "--triptychs", "1"}) == 2);
}

TEST_CASE("seed and sample overrides change the generated payload") {
    TempDir tmp("cli-overrides");
    const auto bytes = [](const std::filesystem::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string{std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>()};
    };

    CHECK(run_cli({"generate", "--out", (tmp / "a.cip").string(), "--grid", "8",
                   "--samples", "2", "--steps", "5", "--seed", "1"}) == 0);
    CHECK(run_cli({"generate", "--out", (tmp / "b.cip").string(), "--grid", "8",
                   "--samples", "2", "--steps", "5", "--seed", "1"}) == 0);
    CHECK(run_cli({"generate", "--out", (tmp / "c.cip").string(), "--grid", "8",
                   "--samples", "2", "--steps", "5", "--seed", "2"}) == 0);
    CHECK(bytes(tmp / "a.cip") == bytes(tmp / "b.cip"));
    CHECK(bytes(tmp / "a.cip") != bytes(tmp / "c.cip"));
}

TEST_CASE("generation accepts a JSON config with overrides on top") {
    TempDir tmp("cli-genconfig");
    std::ofstream((tmp / "gen.json")) << R"({
        "grid_n": 8, "n_samples": 3, "gamma": 0.005, "kappa": 4.7,
        "dt": 0.001, "n_steps": 5, "init_amp": 0.02, "seed": 9, "scale": 50.0
    })";
    CHECK(run_cli({"generate", "--config", (tmp / "gen.json").string(),
                   "--out", (tmp / "d.cip").string(), "--samples", "2"}) == 0);

    std::ifstream is(tmp / "d.meta.json");
    const std::string meta{std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>()};
    CHECK(meta.find("\"n_samples\": 2") != std::string::npos); // override applied
    CHECK(meta.find("\"seed\": 9") != std::string::npos);      // config respected

    std::ofstream((tmp / "bad.json")) << R"({"grid_n": 8, "unknown_key": 1})";
    CHECK(run_cli({"generate", "--config", (tmp / "bad.json").string(),
                   "--out", (tmp / "e.cip").string()}) == 2);
}
