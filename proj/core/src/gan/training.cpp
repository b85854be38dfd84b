#include "cilab/gan/training.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include "cilab/errors.hpp"
#include "cilab/gan/adversarial_losses.hpp"
#include "cilab/gan/physics_ops.hpp"
#include "cilab/gan/tensor_field.hpp"
#include "cilab/rng.hpp"
#include "cilab/summation.hpp"
#include "json_detail.hpp"

namespace cilab::gan {

namespace {

namespace fs = std::filesystem;

// Seed streams derived from cfg.seed; shuffles use child seeds of the
// shuffle root so epochs never collide with the penalty stream.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kPenaltyStream = 2;

std::uint64_t bounded(CounterRng& rng, std::uint64_t n) {
    const std::uint64_t reject_below = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng.next_u64();
        if (r >= reject_below) {
            return r % n;
        }
    }
}

/// Without-replacement sampler: a seeded permutation per epoch.
class SampleStream {
  public:
    SampleStream(std::vector<std::int64_t> pool, std::uint64_t root_seed)
        : order_(std::move(pool)), root_seed_(root_seed) {
        reshuffle();
    }

    std::vector<std::int64_t> take(int count) {
        std::vector<std::int64_t> out;
        out.reserve(static_cast<size_t>(count));
        for (int k = 0; k < count; ++k) {
            if (pos_ == order_.size()) {
                ++epoch_;
                reshuffle();
            }
            out.push_back(order_[pos_++]);
        }
        return out;
    }

  private:
    void reshuffle() {
        CounterRng rng(child_seed(root_seed_, epoch_));
        for (size_t i = order_.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(bounded(rng, i));
            std::swap(order_[i - 1], order_[j]);
        }
        pos_ = 0;
    }

    std::vector<std::int64_t> order_;
    std::uint64_t root_seed_;
    std::uint64_t epoch_ = 0;
    size_t pos_ = 0;
};

std::string checkpoint_id(std::int64_t iteration) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt-%06" PRId64, iteration);
    return buf;
}

void require_finite(double v, const char* term, std::int64_t iteration) {
    if (!std::isfinite(v)) {
        throw NumericsError(std::string("non-finite ") + term + " at iteration " +
                            std::to_string(iteration));
    }
}

bool parameters_finite(const torch::nn::Module& m) {
    for (const auto& p : m.parameters()) {
        if (!torch::isfinite(p).all().item<bool>()) {
            return false;
        }
    }
    return true;
}

void write_train_report(const fs::path& out_dir, const TrainReport& report) {
    nlohmann::json j;
    j["iterations"] = report.iterations;
    j["best"] = {{"id", report.best.id},
                 {"file", report.best.file.filename().string()},
                 {"iteration", report.best.iteration},
                 {"val_mae", report.best.val_mae}};
    auto& arr = j["checkpoints"] = nlohmann::json::array();
    for (const auto& c : report.checkpoints) {
        arr.push_back({{"id", c.id},
                       {"iteration", c.iteration},
                       {"val_mae", c.val_mae},
                       {"critic_loss", c.critic_loss},
                       {"gen_loss", c.gen_loss}});
    }
    const auto path = out_dir / "train_report.json";
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw IoError("cannot write " + path.string());
    }
    os << j.dump(2) << "\n";
}

} // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    if (n_critic < 1) {
        throw ConfigError("n_critic must be >= 1");
    }
    if (max_iters < 0) {
        throw ConfigError("max_iters must be >= 0");
    }
    if (checkpoint_every < 1) {
        throw ConfigError("checkpoint_every must be >= 1");
    }
    if (!(lr_g > 0.0) || !(lr_c > 0.0) || !std::isfinite(lr_g) || !std::isfinite(lr_c)) {
        throw ConfigError("learning rates must be positive and finite");
    }
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (val_indices.empty()) {
        throw ConfigError("val_indices must be non-empty");
    }
    for (auto idx : val_indices) {
        if (idx < 0) {
            throw ConfigError("val_indices must be non-negative");
        }
    }
    if (precision != "f32") {
        throw ConfigError("precision must be \"f32\" (single mode supported)");
    }
    weights.validate();
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("unparseable training config: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("training config must be a JSON object");
    }

    TrainConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "batch_size") {
                cfg.batch_size = value.get<int>();
            } else if (key == "lr_g") {
                cfg.lr_g = value.get<double>();
            } else if (key == "lr_c") {
                cfg.lr_c = value.get<double>();
            } else if (key == "beta1") {
                cfg.beta1 = value.get<double>();
            } else if (key == "beta2") {
                cfg.beta2 = value.get<double>();
            } else if (key == "n_critic") {
                cfg.n_critic = value.get<int>();
            } else if (key == "max_iters") {
                cfg.max_iters = value.get<std::int64_t>();
            } else if (key == "checkpoint_every") {
                cfg.checkpoint_every = value.get<std::int64_t>();
            } else if (key == "val_indices") {
                cfg.val_indices = value.get<std::vector<std::int64_t>>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "weights") {
                cfg.weights = detail::weights_from_json(value);
            } else if (key == "precision") {
                cfg.precision = value.get<std::string>();
            } else {
                throw ConfigError("unknown training config key: " + key);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad training config value for \"" + key + "\": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

TrainConfig TrainConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("cannot open training config: " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return from_json_text(text);
}

double validation_mae(const GenFn& gen, const std::vector<SamplePair>& pairs,
                      double scale) {
    if (pairs.empty()) {
        throw ConfigError("validation requires at least one pair");
    }
    torch::NoGradGuard no_grad;
    CompensatedSum acc;
    for (const auto& pair : pairs) {
        const auto src_t = field_to_tensor(pair.src) * scale;
        const Field out = tensor_to_field(gen(src_t));
        Field tar_scaled = pair.tar;
        for (double& v : tar_scaled.values()) {
            v *= scale;
        }
        acc.add(pixel_mae(out, tar_scaled));
    }
    return acc.value() / static_cast<double>(pairs.size());
}

TrainReport train(const TrainConfig& cfg, const std::filesystem::path& train_data,
                  const std::filesystem::path& val_data,
                  const std::filesystem::path& out_dir, bool deterministic) {
    cfg.validate();
    fs::create_directories(out_dir);

    if (deterministic) {
        at::set_num_threads(1);
        try {
            at::set_num_interop_threads(1);
        } catch (const c10::Error&) {
            // Interop pool already launched; intra-op pinning still applies.
        }
    }
    torch::manual_seed(cfg.seed);

    DatasetReader train_reader(train_data);
    const DatasetMeta meta = train_reader.meta();
    const double scale = meta.scale;
    const PdeParams params = meta.pde;

    DatasetReader val_reader(val_data);
    if (val_reader.meta().grid_n != meta.grid_n) {
        throw ShapeError("train and validation grids differ");
    }
    std::vector<SamplePair> val_pairs;
    val_pairs.reserve(cfg.val_indices.size());
    for (auto idx : cfg.val_indices) {
        val_pairs.push_back(val_reader.read(idx));
    }

    std::error_code ec;
    const bool shared_file = fs::equivalent(train_data, val_data, ec) && !ec;
    std::vector<std::int64_t> pool;
    pool.reserve(static_cast<size_t>(meta.n_samples));
    for (std::int64_t k = 0; k < meta.n_samples; ++k) {
        const bool held_out =
            shared_file && std::find(cfg.val_indices.begin(), cfg.val_indices.end(), k) !=
                               cfg.val_indices.end();
        if (!held_out) {
            pool.push_back(k);
        }
    }
    if (pool.empty()) {
        throw ConfigError("no training samples left after holding out val_indices");
    }

    // Payload under half a gigabyte is cached eagerly; larger sets stream.
    const std::int64_t payload =
        meta.n_samples * 2 * static_cast<std::int64_t>(meta.grid_n) * meta.grid_n * 4;
    std::vector<SamplePair> cache;
    if (payload <= (512ll << 20)) {
        cache = load_pairs(train_data).first;
    }
    const auto fetch = [&](std::int64_t idx) {
        return cache.empty() ? train_reader.read(idx) : cache[static_cast<size_t>(idx)];
    };

    UnetGenerator gen(GeneratorSpec::for_grid(meta.grid_n));
    PatchCritic critic(CriticSpec::for_grid(meta.grid_n));
    gen->train();
    critic->train();
    auto critic_fn = make_critic_fn(critic);

    torch::optim::Adam opt_g(
        gen->parameters(),
        torch::optim::AdamOptions(cfg.lr_g).betas(std::make_tuple(cfg.beta1, cfg.beta2)));
    torch::optim::Adam opt_c(
        critic->parameters(),
        torch::optim::AdamOptions(cfg.lr_c).betas(std::make_tuple(cfg.beta1, cfg.beta2)));

    auto gp_gen = at::detail::createCPUGenerator(child_seed(cfg.seed, kPenaltyStream));
    SampleStream stream(pool, child_seed(cfg.seed, kShuffleStream));

    const std::string meta_hash = dataset_meta_hash(train_data);

    const auto log_path = out_dir / "train_log.txt";
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) {
        throw IoError("cannot write " + log_path.string());
    }

    const auto make_batch = [&](const std::vector<std::int64_t>& idxs) {
        std::vector<Field> srcs;
        std::vector<Field> tars;
        srcs.reserve(idxs.size());
        tars.reserve(idxs.size());
        for (auto idx : idxs) {
            auto pair = fetch(idx);
            srcs.push_back(std::move(pair.src));
            tars.push_back(std::move(pair.tar));
        }
        const auto src_t = (fields_to_batch(srcs) * scale).to(torch::kFloat32);
        const auto tar_t = (fields_to_batch(tars) * scale).to(torch::kFloat32);
        return std::make_pair(src_t, tar_t);
    };

    const auto validate_now = [&]() {
        const GenFn fn = [&](const torch::Tensor& t) {
            return gen->forward(t.to(torch::kFloat32));
        };
        return validation_mae(fn, val_pairs, scale);
    };

    TrainReport report;
    const auto do_checkpoint = [&](std::int64_t iteration, double val_mae,
                                   double critic_l, double gen_l) {
        CheckpointManifest m;
        m.id = checkpoint_id(iteration);
        m.iteration = iteration;
        m.val_mae = val_mae;
        m.grid_n = meta.grid_n;
        m.base_width = gen->spec().base_width;
        m.scale = scale;
        m.precision = cfg.precision;
        m.dataset_meta_hash = meta_hash;
        m.weights = cfg.weights;
        const auto file = out_dir / (m.id + ".ckpt");
        save_checkpoint(file, m, snapshot_state(gen, critic, opt_g, opt_c));
        report.checkpoints.push_back({m.id, iteration, val_mae, critic_l, gen_l});

        const bool improved = report.best.id.empty() || val_mae < report.best.val_mae;
        if (improved) {
            report.best = {file, m.id, iteration, val_mae};
            write_best_pointer(out_dir, report.best);
        }
    };

    char line[512];
    const double val0 = validate_now();
    do_checkpoint(0, val0, 0.0, 0.0);
    std::snprintf(line, sizeof(line), "iter=0 val_mae=%.12g\n", val0);
    log << line;
    log.flush();

    for (std::int64_t iter = 1; iter <= cfg.max_iters; ++iter) {
        double last_critic = 0.0;
        for (int k = 0; k < cfg.n_critic; ++k) {
            const auto [src, tar] = make_batch(stream.take(cfg.batch_size));
            torch::Tensor fake;
            {
                torch::NoGradGuard no_grad;
                fake = gen->forward(src);
            }
            const auto loss_c = critic_loss(critic_fn, src, tar, fake, cfg.weights, gp_gen);
            last_critic = loss_c.item<double>();
            require_finite(last_critic, "critic loss", iter);
            opt_c.zero_grad();
            loss_c.backward();
            opt_c.step();
        }

        const auto [src, tar] = make_batch(stream.take(cfg.batch_size));
        const auto gen_out = gen->forward(src);
        const auto gl = generator_loss(critic_fn, src, tar, gen_out, cfg.weights, params,
                                       scale);
        require_finite(gl.parts.adversarial, "adversarial term", iter);
        require_finite(gl.parts.energy, "energy term", iter);
        require_finite(gl.parts.residual, "residual term", iter);
        require_finite(gl.parts.mae, "mae term", iter);
        require_finite(gl.parts.mean, "mean term", iter);
        require_finite(gl.parts.variance, "variance term", iter);
        const double gen_l = gl.total.item<double>();
        require_finite(gen_l, "generator loss", iter);
        opt_g.zero_grad();
        gl.total.backward();
        opt_g.step();

        int written = std::snprintf(
            line, sizeof(line),
            "iter=%" PRId64
            " critic=%.12g gen=%.12g adv=%.12g energy=%.12g residual=%.12g"
            " mae=%.12g mean=%.12g var=%.12g",
            iter, last_critic, gen_l, gl.parts.adversarial, gl.parts.energy,
            gl.parts.residual, gl.parts.mae, gl.parts.mean, gl.parts.variance);

        if (iter % cfg.checkpoint_every == 0 || iter == cfg.max_iters) {
            if (!parameters_finite(*gen) || !parameters_finite(*critic)) {
                throw NumericsError("non-finite parameters at iteration " +
                                    std::to_string(iter));
            }
            const double val = validate_now();
            std::snprintf(line + written, sizeof(line) - static_cast<size_t>(written),
                          " val_mae=%.12g", val);
            do_checkpoint(iter, val, last_critic, gen_l);
        }
        log << line << "\n";
        log.flush();
    }

    report.iterations = cfg.max_iters;
    write_train_report(out_dir, report);
    if (!log.good()) {
        throw IoError("failed while writing " + log_path.string());
    }
    return report;
}

} // namespace cilab::gan
