#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cilab/gan/models.hpp"
#include "cilab/losses.hpp"

namespace cilab::gan {

/// Run metadata stored alongside the tensors of every checkpoint.
struct CheckpointManifest {
    std::string id;
    std::int64_t iteration = 0;
    double val_mae = 0.0;
    int grid_n = 0;
    int base_width = 64;
    double scale = 1.0;
    std::string precision = "f32";
    std::string dataset_meta_hash;
    LossWeights weights;
};

struct NamedTensor {
    std::string name;
    torch::Tensor tensor;
};

struct Checkpoint {
    CheckpointManifest manifest;
    std::vector<NamedTensor> tensors;
};

/// Container layout, all integers little-endian: magic "CKP1", u32 version,
/// u64 manifest byte length, manifest JSON (UTF-8), u32 tensor count, then
/// per tensor: u32 name length, name bytes, u32 rank, u64 dims, f32 payload.
void save_checkpoint(const std::filesystem::path& path,
                     const CheckpointManifest& manifest,
                     const std::vector<NamedTensor>& tensors);

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Manifest only; stops before the tensor section.
CheckpointManifest load_manifest(const std::filesystem::path& path);

/// Generator/critic parameters and buffers plus per-parameter Adam moments.
/// Names carry the owner: g.*, c.*, opt_g.*, opt_c.*. Spectral u/v vectors
/// ride along as critic buffers; Adam step counters are stored as scalars.
std::vector<NamedTensor> snapshot_state(const UnetGenerator& gen,
                                        const PatchCritic& critic,
                                        torch::optim::Adam& opt_g,
                                        torch::optim::Adam& opt_c);

/// Copies g.* tensors into the generator; a missing name is a format error.
void restore_generator(UnetGenerator& gen, const Checkpoint& ckpt);

/// Full restore: both models, their buffers, and the Adam moment state.
void restore_state(UnetGenerator& gen, PatchCritic& critic,
                   torch::optim::Adam& opt_g, torch::optim::Adam& opt_c,
                   const Checkpoint& ckpt);

struct CheckpointRef {
    std::filesystem::path file;
    std::string id;
    std::int64_t iteration = 0;
    double val_mae = 0.0;
};

/// Minimal recorded validation MAE across *.ckpt files in the directory;
/// ties break toward the earliest iteration. Throws when none exist.
CheckpointRef select_best_checkpoint(const std::filesystem::path& out_dir);

/// Writes the best-checkpoint pointer file (best_checkpoint.json).
void write_best_pointer(const std::filesystem::path& out_dir, const CheckpointRef& best);

} // namespace cilab::gan
