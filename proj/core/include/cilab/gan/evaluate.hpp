#pragma once

#include <filesystem>

#include "cilab/gan/checkpoint.hpp"
#include "cilab/gan/models.hpp"
#include "cilab/report.hpp"

namespace cilab::gan {

/// Rebuilds the generator described by a checkpoint manifest and loads its
/// weights. The model comes back in eval mode.
UnetGenerator generator_from_checkpoint(const Checkpoint& ckpt);

struct EvalOptions {
    int triptychs = 0;                  ///< figures to render, from index 0
    std::filesystem::path triptych_dir; ///< output directory for figures
};

/// Streams the dataset through the checkpointed generator and aggregates
/// sample-wise MAEs in scaled units. Read-only with respect to both inputs.
EvalReport evaluate(const std::filesystem::path& checkpoint_path,
                    const std::filesystem::path& data_path,
                    const EvalOptions& options = {});

} // namespace cilab::gan
