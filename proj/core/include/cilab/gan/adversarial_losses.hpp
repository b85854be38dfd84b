#pragma once

#include <torch/torch.h>

#include <functional>
#include <optional>

#include "cilab/field.hpp"
#include "cilab/gan/models.hpp"
#include "cilab/losses.hpp"

namespace cilab::gan {

/// Critic as a function: (src batch, candidate batch) -> per-sample scores [B].
/// Loss assembly is written against this signature so closed-form witnesses
/// can stand in for the patch critic in tests.
using CriticFn = std::function<torch::Tensor(const torch::Tensor&, const torch::Tensor&)>;

inline CriticFn make_critic_fn(PatchCritic critic) {
    return [critic](const torch::Tensor& src, const torch::Tensor& x) mutable {
        return critic->score(src, x);
    };
}

/// mean over batch of (|grad_xhat D(src, xhat)|_2 - 1)^2 with one
/// interpolation coefficient per sample; caller applies lambda_gp.
/// The returned scalar carries a double-backward-capable graph.
torch::Tensor gradient_penalty(const CriticFn& critic, const torch::Tensor& src,
                               const torch::Tensor& real_tar,
                               const torch::Tensor& fake_tar,
                               std::optional<torch::Generator> gen = std::nullopt);

/// mean D(src, fake) - mean D(src, real) + lambda_gp * gradient_penalty.
/// fake_tar is detached here; critic updates never reach the generator.
torch::Tensor critic_loss(const CriticFn& critic, const torch::Tensor& src,
                          const torch::Tensor& real_tar, const torch::Tensor& fake_tar,
                          const LossWeights& weights,
                          std::optional<torch::Generator> gen = std::nullopt);

/// Per-term values before weighting, as they are logged.
struct GeneratorLossBreakdown {
    double adversarial = 0.0; ///< -mean D(src, gen_out), reported as added
    double energy = 0.0;
    double residual = 0.0;
    double mae = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

struct GeneratorLossResult {
    torch::Tensor total;
    GeneratorLossBreakdown parts;
};

/// -mean D + lambda_e*energy + lambda_r*residual + lambda_mae*mae
/// + lambda_mu*mean + lambda_sigma*variance, all fields in scaled units.
GeneratorLossResult generator_loss(const CriticFn& critic, const torch::Tensor& src,
                                   const torch::Tensor& tar, const torch::Tensor& gen_out,
                                   const LossWeights& weights, const PdeParams& params,
                                   double scale);

} // namespace cilab::gan
