#pragma once

#include "cilab/field.hpp"

namespace cilab {

/// How the energy mismatch enters the loss.
enum class EnergyMatch {
    Abs,     ///< |E(pred) - E(tar)|, same scale as the L1 terms (default)
    Squared, ///< (E(pred) - E(tar))^2
};

/// Weights of the composite generator objective plus the residual step
/// count. All weights must be >= 0.
struct LossWeights {
    double lambda_e = 1.0;      ///< energy matching
    double lambda_r = 10.0;     ///< forward-simulation residual
    double lambda_mae = 100.0;  ///< pixel MAE
    double lambda_mu = 1.0;     ///< mean matching
    double lambda_sigma = 1.0;  ///< variance matching
    double lambda_gp = 10.0;    ///< critic gradient penalty
    int s_steps = 100;          ///< residual simulation step count
    EnergyMatch energy_match = EnergyMatch::Abs;

    void validate() const;
};

/// Discrete free energy
///   E(u) = h^2 * [ sum (gamma/2)*((u[i+1,j]-u[i,j])/h)^2
///                + sum (gamma/2)*((u[i,j+1]-u[i,j])/h)^2
///                + sum (kappa/4)*(u^2-1)^2 ]
/// with forward differences over interior and boundary alike; the potential
/// is summed over all nodes. Non-increasing along solver trajectories at
/// stable dt, which the tests verify step by step.
double lyapunov_energy(const Field& u, const PdeParams& params);

/// Energy mismatch between prediction and target.
double energy_loss(const Field& pred, const Field& tar, const PdeParams& params,
                   EnergyMatch mode = EnergyMatch::Abs);

struct MomentLosses {
    double mean_loss = 0.0; ///< (mean(pred) - mean(tar))^2
    double var_loss = 0.0;  ///< (var(pred) - var(tar))^2
};

MomentLosses moment_losses(const Field& pred, const Field& tar);

/// (1/n^2) * sum |pred - tar|.
double pixel_mae(const Field& pred, const Field& tar);

/// Forward-simulation consistency in scaled units:
///   u0_hat = pred_scaled / scale, boundary ring forced to bc_value;
///   u_sim  = F^s(u0_hat);
///   result = (1/n^2) * sum |scale * u_sim - src_scaled|.
/// The simulation always runs on physical amplitudes. This is the value
/// route; the differentiable route used in training lives in cilab::gan
/// and is held to agree with this one by the test suite.
double residual_loss(const Field& pred_scaled, const Field& src_scaled,
                     const PdeParams& params, double scale, int s);

} // namespace cilab
