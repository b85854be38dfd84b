#pragma once

#include <torch/torch.h>

#include "cilab/field.hpp"
#include "cilab/losses.hpp"

namespace cilab::gan {

// Differentiable twins of the scalar physics operators, written as tensor
// expressions over [B,1,n,n] batches so gradients flow through every Euler
// step. Each op mirrors its double-precision counterpart term for term;
// the test suite holds the two routes together at tight tolerance.

/// One explicit Euler step; boundary ring rewritten to bc_value.
torch::Tensor euler_step_t(const torch::Tensor& u, const PdeParams& params);

/// steps applications of euler_step_t (0 steps returns u unchanged).
torch::Tensor simulate_t(torch::Tensor u, const PdeParams& params, int steps);

/// Boundary ring forced to bc_value; gradients do not flow into the
/// overwritten ring.
torch::Tensor force_boundary(const torch::Tensor& u, double bc_value);

/// Discrete free energy per sample, shape [B].
torch::Tensor lyapunov_energy_t(const torch::Tensor& u, const PdeParams& params);

/// Energy mismatch per sample, shape [B].
torch::Tensor energy_loss_t(const torch::Tensor& pred, const torch::Tensor& tar,
                            const PdeParams& params, EnergyMatch mode = EnergyMatch::Abs);

/// Mean absolute difference per sample, shape [B].
torch::Tensor pixel_mae_t(const torch::Tensor& pred, const torch::Tensor& tar);

struct MomentLossesT {
    torch::Tensor mean_loss; ///< [B]
    torch::Tensor var_loss;  ///< [B]
};

MomentLossesT moment_losses_t(const torch::Tensor& pred, const torch::Tensor& tar);

/// Forward-simulation residual per sample, shape [B]: descale, force the
/// boundary, run s Euler steps in physical units, compare in scaled units.
torch::Tensor residual_loss_t(const torch::Tensor& pred_scaled,
                              const torch::Tensor& src_scaled,
                              const PdeParams& params, double scale, int s);

} // namespace cilab::gan
