#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cilab/dataset.hpp"
#include "cilab/gan/checkpoint.hpp"
#include "cilab/losses.hpp"

namespace cilab::gan {

/// Loop hyperparameters. Serialized as strict JSON: only these field names
/// are accepted, unknown keys are rejected, missing keys keep defaults.
struct TrainConfig {
    int batch_size = 1;
    double lr_g = 1e-4;
    double lr_c = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    int n_critic = 5;
    std::int64_t max_iters = 2000;
    std::int64_t checkpoint_every = 100;
    std::vector<std::int64_t> val_indices{0, 1, 2};
    std::uint64_t seed = 0;
    LossWeights weights;
    std::string precision = "f32";

    void validate() const;

    static TrainConfig from_json_text(const std::string& text);
    static TrainConfig from_json_file(const std::filesystem::path& path);
};

/// Generator as a function on scaled [B,1,n,n] sources.
using GenFn = std::function<torch::Tensor(const torch::Tensor&)>;

/// Mean over pairs of the pixel MAE between G(src_scaled) and tar_scaled.
double validation_mae(const GenFn& gen, const std::vector<SamplePair>& pairs,
                      double scale);

struct CheckpointRecord {
    std::string id;
    std::int64_t iteration = 0;
    double val_mae = 0.0;
    double critic_loss = 0.0; ///< last critic loss at this iteration
    double gen_loss = 0.0;    ///< generator loss at this iteration
};

struct TrainReport {
    std::int64_t iterations = 0;
    std::vector<CheckpointRecord> checkpoints;
    CheckpointRef best;
};

/// WGAN-GP loop: per iteration, n_critic critic updates then one generator
/// update, each on fresh samples from a seeded per-epoch permutation.
/// Checkpoints at iteration 0, every checkpoint_every iterations, and at
/// the final iteration; the best-checkpoint pointer follows the minimal
/// validation MAE (ties keep the earliest). Writes train_log.txt and
/// train_report.json into out_dir. Non-finite losses or parameters abort
/// with a diagnostic naming the term and iteration. When train and val
/// point at the same file, val_indices are excluded from the training pool.
TrainReport train(const TrainConfig& cfg, const std::filesystem::path& train_data,
                  const std::filesystem::path& val_data,
                  const std::filesystem::path& out_dir, bool deterministic = false);

} // namespace cilab::gan
