#include "cilab_cli/cli.hpp"

#include <ATen/Parallel.h>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cilab/dataset.hpp"
#include "cilab/errors.hpp"
#include "cilab/gan/evaluate.hpp"
#include "cilab/gan/tensor_field.hpp"
#include "cilab/gan/training.hpp"
#include "cilab/image.hpp"
#include "cilab/losses.hpp"
#include "cilab/report.hpp"
#include "cilab/solver.hpp"

namespace cilab::cli {

namespace {

namespace fs = std::filesystem;

void apply_threads(const std::optional<int>& threads) {
    if (threads) {
        if (*threads < 1) {
            throw ConfigError("--threads must be >= 1");
        }
        at::set_num_threads(*threads);
    }
}

/// Dataset generation settings; defaults reproduce the reference run.
struct GenerateConfig {
    int grid_n = 128;
    std::int64_t n_samples = 1;
    double gamma = 0.005;
    double kappa = 4.7;
    double dt = 1e-3;
    int n_steps = 100;
    double init_amp = 0.02;
    std::uint64_t seed = 0;
    std::optional<double> scale;
};

GenerateConfig parse_generate_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("cannot open generation config: " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("unparseable generation config: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("generation config must be a JSON object");
    }
    GenerateConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "grid_n") {
                cfg.grid_n = value.get<int>();
            } else if (key == "n_samples") {
                cfg.n_samples = value.get<std::int64_t>();
            } else if (key == "gamma") {
                cfg.gamma = value.get<double>();
            } else if (key == "kappa") {
                cfg.kappa = value.get<double>();
            } else if (key == "dt") {
                cfg.dt = value.get<double>();
            } else if (key == "n_steps") {
                cfg.n_steps = value.get<int>();
            } else if (key == "init_amp") {
                cfg.init_amp = value.get<double>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "scale") {
                cfg.scale = value.get<double>();
            } else {
                throw ConfigError("unknown generation config key: " + key);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad generation config value for \"" + key + "\": " +
                              e.what());
        }
    }
    return cfg;
}

DatasetMeta meta_from_config(const GenerateConfig& cfg) {
    DatasetMeta meta;
    meta.grid_n = cfg.grid_n;
    meta.n_samples = cfg.n_samples;
    meta.pde = PdeParams::create(cfg.gamma, cfg.kappa, cfg.dt, cfg.n_steps, cfg.grid_n,
                                 0.0);
    meta.init_amp = cfg.init_amp;
    meta.seed = cfg.seed;
    if (cfg.scale) {
        meta.scale = *cfg.scale;
    } else if (cfg.init_amp > 0.0) {
        meta.scale = 1.0 / cfg.init_amp;
    } else {
        throw ConfigError("scale is required when init_amp is 0");
    }
    return meta;
}

struct GenerateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> samples;
    std::optional<int> grid;
    std::optional<int> steps;
    std::optional<int> threads;
};

void run_generate(const GenerateArgs& a) {
    apply_threads(a.threads);
    GenerateConfig cfg;
    if (!a.config.empty()) {
        cfg = parse_generate_config(a.config);
    }
    if (a.seed) cfg.seed = *a.seed;
    if (a.samples) cfg.n_samples = *a.samples;
    if (a.grid) cfg.grid_n = *a.grid;
    if (a.steps) cfg.n_steps = *a.steps;

    const DatasetMeta meta = meta_from_config(cfg);
    const auto summary = generate_dataset(meta, a.out);
    std::printf("status=ok cmd=generate out=%s samples=%" PRId64
                " grid=%d steps=%d seed=%" PRIu64 " elapsed=%.3f\n",
                a.out.c_str(), summary.count, meta.grid_n, meta.pde.n_steps,
                meta.seed, summary.elapsed_seconds);
}

struct SimulateArgs {
    std::string in;
    int steps = 0;
    int record_every = 1;
    std::string out;
    std::optional<int> threads;
};

void run_simulate(const SimulateArgs& a) {
    apply_threads(a.threads);
    DatasetReader reader(a.in);
    const DatasetMeta meta = reader.meta();
    const SamplePair pair = reader.read(0);

    const PdeParams params = PdeParams::create(meta.pde.gamma, meta.pde.kappa,
                                               meta.pde.dt, a.steps, meta.grid_n, 0.0);
    const auto snapshots = simulate_trajectory(pair.tar, params, a.steps, a.record_every);
    std::vector<int> labels{0};
    for (int s = 1; s <= a.steps; ++s) {
        if (s % a.record_every == 0 || s == a.steps) {
            labels.push_back(s);
        }
    }

    fs::create_directories(a.out);
    for (size_t k = 0; k < snapshots.size(); ++k) {
        DatasetMeta snap = meta;
        snap.n_samples = 1;
        snap.pde = PdeParams::create(meta.pde.gamma, meta.pde.kappa, meta.pde.dt,
                                     labels[k], meta.grid_n, 0.0);
        SamplePair rec;
        rec.src = snapshots[k];
        rec.tar = pair.tar;
        rec.index = 0;
        char name[32];
        std::snprintf(name, sizeof(name), "step_%06d.cip", labels[k]);
        write_pairs(fs::path(a.out) / name, snap, {rec});
    }
    std::printf("status=ok cmd=simulate out=%s snapshots=%zu steps=%d record_every=%d\n",
                a.out.c_str(), snapshots.size(), a.steps, a.record_every);
}

struct EnergyArgs {
    std::string in;
    std::optional<int> threads;
};

void run_energy(const EnergyArgs& a) {
    apply_threads(a.threads);
    DatasetReader reader(a.in);
    const SamplePair pair = reader.read(0);
    const double e = lyapunov_energy(pair.src, reader.meta().pde);
    std::printf("%.17g\n", e);
    std::printf("status=ok cmd=energy energy=%.17g grid=%d\n", e, reader.meta().grid_n);
}

struct TrainArgs {
    std::string config;
    std::string train_data;
    std::string val_data;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool deterministic = false;
    std::optional<int> threads;
};

void run_train(const TrainArgs& a) {
    apply_threads(a.threads);
    gan::TrainConfig cfg = gan::TrainConfig::from_json_file(a.config);
    if (a.seed) {
        cfg.seed = *a.seed;
    }
    const auto report = gan::train(cfg, a.train_data, a.val_data, a.out_dir,
                                   a.deterministic);
    std::printf("status=ok cmd=train out_dir=%s iterations=%" PRId64
                " checkpoints=%zu best_id=%s best_val_mae=%.17g\n",
                a.out_dir.c_str(), report.iterations, report.checkpoints.size(),
                report.best.id.c_str(), report.best.val_mae);
}

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string report;
    std::string csv;
    int triptychs = 0;
    std::string out_dir;
    std::optional<int> threads;
};

void run_eval(const EvalArgs& a) {
    apply_threads(a.threads);
    if (a.triptychs > 0 && a.out_dir.empty()) {
        throw ConfigError("--triptychs requires --out-dir");
    }
    gan::EvalOptions options;
    options.triptychs = a.triptychs;
    options.triptych_dir = a.out_dir;
    const EvalReport report = gan::evaluate(a.checkpoint, a.data, options);
    write_report_json(report, a.report);
    if (!a.csv.empty()) {
        write_report_csv(report, a.csv);
    }
    std::printf("status=ok cmd=eval n=%" PRId64
                " mae_mean=%.17g mae_std=%.17g sem=%.17g report=%s\n",
                report.n_samples, report.mae_mean, report.mae_std, report.sem,
                a.report.c_str());
}

struct RenderArgs {
    std::string data;
    std::int64_t index = 0;
    std::string checkpoint;
    std::string out;
    std::optional<int> threads;
};

void run_render(const RenderArgs& a) {
    apply_threads(a.threads);
    const auto ckpt = gan::load_checkpoint(a.checkpoint);
    auto gen = gan::generator_from_checkpoint(ckpt);

    DatasetReader reader(a.data);
    if (reader.meta().grid_n != ckpt.manifest.grid_n) {
        throw ShapeError("dataset grid does not match checkpoint grid");
    }
    const double scale = ckpt.manifest.scale;
    SamplePair pair = reader.read(a.index);
    for (double& v : pair.src.values()) v *= scale;
    for (double& v : pair.tar.values()) v *= scale;

    torch::NoGradGuard no_grad;
    const auto out_t = gen->forward(gan::field_to_tensor(pair.src, torch::kFloat32));
    const Field generated = gan::tensor_to_field(out_t);
    const double mae = pixel_mae(generated, pair.tar);
    render_triptych(pair.src, generated, pair.tar, a.out);
    std::printf("status=ok cmd=render out=%s index=%" PRId64 " mae=%.17g\n",
                a.out.c_str(), a.index, mae);
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Inverse Chafee-Infante laboratory: dataset generation, forward "
                 "simulation, adversarial training, and evaluation."};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<int> threads;
    app.add_option("--threads", threads, "Worker thread cap")
        ->envname("CI_LAB_THREADS");

    GenerateArgs gen_args;
    auto* gen_cmd = app.add_subcommand(
        "generate", "Generate a dataset of (late-time, initial) field pairs");
    gen_cmd->add_option("--config", gen_args.config, "Generation config JSON");
    gen_cmd->add_option("--out", gen_args.out, "Output .cip path")->required();
    gen_cmd->add_option("--seed", gen_args.seed, "Override the config seed");
    gen_cmd->add_option("--samples", gen_args.samples, "Override the sample count")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--grid", gen_args.grid, "Override the grid side")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--steps", gen_args.steps, "Override the solver step count")
        ->check(CLI::NonNegativeNumber);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Evolve record 0's initial condition, writing snapshot files");
    sim_cmd->add_option("--in", sim_args.in, "Input .cip file")->required();
    sim_cmd->add_option("--steps", sim_args.steps, "Steps to simulate")
        ->required()
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--record-every", sim_args.record_every, "Snapshot cadence")
        ->required()
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--out", sim_args.out, "Output directory")->required();

    EnergyArgs energy_args;
    auto* energy_cmd = app.add_subcommand(
        "energy", "Print the free energy of record 0's late-time field");
    energy_cmd->add_option("--in", energy_args.in, "Input .cip file")->required();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Run the adversarial training loop");
    train_cmd->add_option("--config", train_args.config, "Training config JSON")
        ->required();
    train_cmd->add_option("--train-data", train_args.train_data, "Training .cip file")
        ->required();
    train_cmd->add_option("--val-data", train_args.val_data, "Validation .cip file")
        ->required();
    train_cmd->add_option("--out-dir", train_args.out_dir, "Checkpoint/log directory")
        ->required();
    train_cmd->add_option("--seed", train_args.seed, "Override the config seed");
    train_cmd->add_flag("--deterministic", train_args.deterministic,
                        "Single-threaded bit-reproducible mode");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")
        ->required();
    eval_cmd->add_option("--data", eval_args.data, "Dataset .cip file")->required();
    eval_cmd->add_option("--report", eval_args.report, "Output report JSON path")
        ->required();
    eval_cmd->add_option("--csv", eval_args.csv, "Optional per-sample CSV path");
    eval_cmd->add_option("--triptychs", eval_args.triptychs,
                         "Render figures for the first N samples")
        ->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--out-dir", eval_args.out_dir, "Figure output directory");

    RenderArgs render_args;
    auto* render_cmd = app.add_subcommand(
        "render", "Render one (source | generated | target) figure");
    render_cmd->add_option("--data", render_args.data, "Dataset .cip file")->required();
    render_cmd->add_option("--index", render_args.index, "Record index")
        ->required()
        ->check(CLI::NonNegativeNumber);
    render_cmd->add_option("--checkpoint", render_args.checkpoint, "Checkpoint file")
        ->required();
    render_cmd->add_option("--out", render_args.out, "Output PNG path")->required();

    gen_cmd->callback([&] { gen_args.threads = threads; run_generate(gen_args); });
    sim_cmd->callback([&] { sim_args.threads = threads; run_simulate(sim_args); });
    energy_cmd->callback([&] { energy_args.threads = threads; run_energy(energy_args); });
    train_cmd->callback([&] { train_args.threads = threads; run_train(train_args); });
    eval_cmd->callback([&] { eval_args.threads = threads; run_eval(eval_args); });
    render_cmd->callback([&] { render_args.threads = threads; run_render(render_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

} // namespace cilab::cli
