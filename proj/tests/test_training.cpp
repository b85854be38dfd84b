#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "torch_doctest.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "cilab/dataset.hpp"
#include "cilab/gan/training.hpp"
#include "test_util.hpp"

using namespace cilab;
using namespace cilab::gan;
using cilab::testing::TempDir;

namespace {

std::filesystem::path make_dataset(const TempDir& tmp, const std::string& name,
                                   int grid_n, std::int64_t n_samples,
                                   std::uint64_t seed, int n_steps = 10) {
    DatasetMeta m;
    m.grid_n = grid_n;
    m.n_samples = n_samples;
    m.pde = PdeParams::create(0.005, 4.7, 1e-3, n_steps, grid_n);
    m.init_amp = 0.02;
    m.seed = seed;
    m.scale = 50.0;
    const auto path = tmp / name;
    generate_dataset(m, path);
    return path;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

TrainConfig tiny_config(std::int64_t iters, std::int64_t every = 1) {
    TrainConfig cfg;
    cfg.max_iters = iters;
    cfg.checkpoint_every = every;
    cfg.seed = 5;
    cfg.weights.s_steps = 10;
    return cfg;
}

} // namespace

TEST_CASE("config parsing keeps defaults for missing keys") {
    const TrainConfig cfg = TrainConfig::from_json_text("{}");
    CHECK(cfg.batch_size == 1);
    CHECK(cfg.lr_g == 1e-4);
    CHECK(cfg.lr_c == 1e-4);
    CHECK(cfg.beta1 == 0.5);
    CHECK(cfg.beta2 == 0.9);
    CHECK(cfg.n_critic == 5);
    CHECK(cfg.max_iters == 2000);
    CHECK(cfg.checkpoint_every == 100);
    CHECK(cfg.val_indices == std::vector<std::int64_t>{0, 1, 2});
    CHECK(cfg.seed == 0);
    CHECK(cfg.precision == "f32");
    CHECK(cfg.weights.lambda_mae == 100.0);
    CHECK(cfg.weights.lambda_r == 10.0);
    CHECK(cfg.weights.s_steps == 100);
}

TEST_CASE("config parsing reads every documented key") {
    const std::string text = R"({
        "batch_size": 2,
        "lr_g": 2e-4,
        "lr_c": 3e-4,
        "beta1": 0.4,
        "beta2": 0.8,
        "n_critic": 3,
        "max_iters": 50,
        "checkpoint_every": 10,
        "val_indices": [4, 5],
        "seed": 77,
        "precision": "f32",
        "weights": {
            "lambda_e": 2.0,
            "lambda_r": 11.0,
            "lambda_mae": 90.0,
            "lambda_mu": 0.5,
            "lambda_sigma": 0.25,
            "lambda_gp": 9.0,
            "s_steps": 42,
            "energy_match": "squared"
        }
    })";
    const TrainConfig cfg = TrainConfig::from_json_text(text);
    CHECK(cfg.batch_size == 2);
    CHECK(cfg.lr_g == 2e-4);
    CHECK(cfg.lr_c == 3e-4);
    CHECK(cfg.beta1 == 0.4);
    CHECK(cfg.beta2 == 0.8);
    CHECK(cfg.n_critic == 3);
    CHECK(cfg.max_iters == 50);
    CHECK(cfg.checkpoint_every == 10);
    CHECK(cfg.val_indices == std::vector<std::int64_t>{4, 5});
    CHECK(cfg.seed == 77);
    CHECK(cfg.weights.lambda_e == 2.0);
    CHECK(cfg.weights.lambda_r == 11.0);
    CHECK(cfg.weights.lambda_mae == 90.0);
    CHECK(cfg.weights.lambda_mu == 0.5);
    CHECK(cfg.weights.lambda_sigma == 0.25);
    CHECK(cfg.weights.lambda_gp == 9.0);
    CHECK(cfg.weights.s_steps == 42);
    CHECK(cfg.weights.energy_match == EnergyMatch::Squared);
}

TEST_CASE("unknown config keys are rejected at both levels") {
    CHECK_THROWS_AS(TrainConfig::from_json_text(R"({"batch": 1})"), ConfigError);
    CHECK_THROWS_AS(TrainConfig::from_json_text(R"({"weights": {"lambda": 1.0}})"),
                    ConfigError);
    CHECK_THROWS_AS(TrainConfig::from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(TrainConfig::from_json_text("[1,2]"), ConfigError);
}

TEST_CASE("config validation rejects out-of-range values") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.n_critic = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.lr_g = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.beta2 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.val_indices = {};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.precision = "f16";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.checkpoint_every = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("a zero-output generator scores one half against uniform targets") {
    // Targets drawn Uniform[-1,1] at every node, pred identically zero:
    // E|tar| = 1/2, so the mean MAE concentrates at 0.5.
    const int n = 16;
    CounterRng rng(2024);
    std::vector<SamplePair> pairs;
    for (int k = 0; k < 200; ++k) {
        SamplePair p;
        p.src = make_field(n, 0.0);
        p.tar = make_field(n, 0.0);
        for (double& v : p.tar.values()) v = -1.0 + 2.0 * rng.next_unit();
        pairs.push_back(std::move(p));
    }

    const GenFn zero = [](const torch::Tensor& x) { return torch::zeros_like(x); };
    const double mae = validation_mae(zero, pairs, /*scale=*/1.0);
    CHECK(mae > 0.49);
    CHECK(mae < 0.51);
}

TEST_CASE("on solver data the zero baseline is diluted by the boundary ring") {
    TempDir tmp("train-zero");
    const auto data = make_dataset(tmp, "d.cip", 16, 120, 11);
    auto [pairs, meta] = load_pairs(data);

    // Dataset targets carry the homogeneous Dirichlet ring, which a zero
    // generator matches exactly, so the whole-field MAE is the interior
    // fraction times one half: (14/16)^2 * 0.5 ~ 0.383 on a 16-grid.
    const GenFn zero = [](const torch::Tensor& x) { return torch::zeros_like(x); };
    const double mae = validation_mae(zero, pairs, meta.scale);
    const double expected = 0.5 * (14.0 * 14.0) / (16.0 * 16.0);
    CHECK(mae == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("validation_mae rejects an empty pair list") {
    const GenFn zero = [](const torch::Tensor& x) { return torch::zeros_like(x); };
    CHECK_THROWS_AS(validation_mae(zero, {}, 50.0), ConfigError);
}

TEST_CASE("a short run writes logs, checkpoints, a report, and a best pointer") {
    TempDir tmp("train-short");
    const auto data = make_dataset(tmp, "d.cip", 16, 8, 3);
    TempDir out("train-short-out");

    const TrainConfig cfg = tiny_config(3, 2);
    const TrainReport report = train(cfg, data, data, out.path(), /*deterministic=*/true);

    CHECK(report.iterations == 3);
    // Checkpoints at iteration 0, the multiple of 2, and the final step.
    REQUIRE(report.checkpoints.size() == 3);
    CHECK(report.checkpoints[0].iteration == 0);
    CHECK(report.checkpoints[1].iteration == 2);
    CHECK(report.checkpoints[2].iteration == 3);
    CHECK(std::filesystem::exists(out / "ckpt-000000.ckpt"));
    CHECK(std::filesystem::exists(out / "ckpt-000002.ckpt"));
    CHECK(std::filesystem::exists(out / "ckpt-000003.ckpt"));
    CHECK(std::filesystem::exists(out / "best_checkpoint.json"));
    CHECK(std::filesystem::exists(out / "train_report.json"));

    // The best pointer is the argmin over recorded validation MAEs.
    double best = 1e9;
    for (const auto& c : report.checkpoints) best = std::min(best, c.val_mae);
    CHECK(report.best.val_mae == best);

    const std::string log = slurp(out / "train_log.txt");
    CHECK(log.find("iter=0 val_mae=") != std::string::npos);
    CHECK(log.find("iter=1 critic=") != std::string::npos);
    CHECK(log.find("residual=") != std::string::npos);
    CHECK(log.find("var=") != std::string::npos);
}

TEST_CASE("deterministic runs repeat bitwise, different seeds diverge") {
    TempDir tmp("train-determinism");
    const auto data = make_dataset(tmp, "d.cip", 16, 8, 9);

    TempDir o1("train-det-1"), o2("train-det-2"), o3("train-det-3");
    const TrainConfig cfg = tiny_config(2);
    train(cfg, data, data, o1.path(), true);
    train(cfg, data, data, o2.path(), true);
    CHECK(slurp(o1 / "train_log.txt") == slurp(o2 / "train_log.txt"));

    TrainConfig other = cfg;
    other.seed = 6;
    train(other, data, data, o3.path(), true);
    CHECK(slurp(o1 / "train_log.txt") != slurp(o3 / "train_log.txt"));
}

TEST_CASE("a resumed generator reproduces its recorded validation MAE") {
    TempDir tmp("train-resume");
    const auto data = make_dataset(tmp, "d.cip", 16, 8, 13);
    TempDir out("train-resume-out");

    const TrainConfig cfg = tiny_config(2);
    const TrainReport report = train(cfg, data, data, out.path(), true);

    const Checkpoint ckpt = load_checkpoint(out / (report.best.id + ".ckpt"));
    UnetGenerator gen{GeneratorSpec::for_grid(ckpt.manifest.grid_n,
                                              ckpt.manifest.base_width)};
    restore_generator(gen, ckpt);
    gen->eval();

    auto [pairs, meta] = load_pairs(data);
    std::vector<SamplePair> val;
    for (auto idx : cfg.val_indices) val.push_back(pairs[static_cast<size_t>(idx)]);

    const GenFn fn = [&gen](const torch::Tensor& x) {
        torch::NoGradGuard ng;
        return gen->forward(x.to(torch::kFloat32)).to(torch::kFloat64);
    };
    const double mae = validation_mae(fn, val, meta.scale);
    CHECK(mae == doctest::Approx(report.best.val_mae).epsilon(1e-6));
}

TEST_CASE("training refuses an empty pool and out-of-range validation indices") {
    TempDir tmp("train-bounds");
    const auto data = make_dataset(tmp, "d.cip", 16, 3, 15);
    TempDir out("train-bounds-out");

    // All three records held out for validation leaves nothing to train on.
    CHECK_THROWS_AS(train(tiny_config(1), data, data, out.path(), true), ConfigError);

    TrainConfig cfg = tiny_config(1);
    cfg.val_indices = {99};
    CHECK_THROWS_AS(train(cfg, data, data, out.path(), true), FormatError);
}

TEST_CASE("separate validation data keeps the whole training pool") {
    TempDir tmp("train-split");
    const auto train_data = make_dataset(tmp, "t.cip", 16, 3, 17);
    const auto val_data = make_dataset(tmp, "v.cip", 16, 3, 18);
    TempDir out("train-split-out");

    // With a distinct validation file the 3-record pool stays intact even
    // though val_indices covers {0,1,2}.
    const TrainReport report = train(tiny_config(1), train_data, val_data, out.path(), true);
    CHECK(report.iterations == 1);
}

TEST_CASE("grid mismatch between train and validation data is rejected") {
    TempDir tmp("train-grids");
    const auto a = make_dataset(tmp, "a.cip", 16, 4, 19);
    const auto b = make_dataset(tmp, "b.cip", 8, 4, 19);
    TempDir out("train-grids-out");
    CHECK_THROWS_AS(train(tiny_config(1), a, b, out.path(), true), ShapeError);
}

TEST_CASE("max_iters zero still values and checkpoints the initial state") {
    TempDir tmp("train-none");
    const auto data = make_dataset(tmp, "d.cip", 16, 8, 23);
    TempDir out("train-none-out");

    const TrainReport report = train(tiny_config(0), data, data, out.path(), true);
    CHECK(report.iterations == 0);
    REQUIRE(report.checkpoints.size() == 1);
    CHECK(report.checkpoints[0].iteration == 0);
    CHECK(report.best.iteration == 0);
    CHECK(std::filesystem::exists(out / "ckpt-000000.ckpt"));
}
