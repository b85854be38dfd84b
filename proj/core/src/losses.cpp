#include "cilab/losses.hpp"

#include <cmath>
#include <string>

#include "cilab/solver.hpp"
#include "cilab/summation.hpp"

namespace cilab {

namespace {

void require_same_shape(const Field& a, const Field& b) {
    if (a.n() != b.n()) {
        throw ShapeError("field sides differ: " + std::to_string(a.n()) + " vs " +
                         std::to_string(b.n()));
    }
}

} // namespace

void LossWeights::validate() const {
    const double ws[] = {lambda_e, lambda_r, lambda_mae, lambda_mu, lambda_sigma, lambda_gp};
    for (double w : ws) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw ConfigError("loss weights must be >= 0 and finite");
        }
    }
    if (s_steps < 0) {
        throw ConfigError("s_steps must be >= 0");
    }
}

double lyapunov_energy(const Field& u, const PdeParams& params) {
    if (u.n() != params.grid_n) {
        throw ShapeError("field side " + std::to_string(u.n()) +
                         " does not match grid_n " + std::to_string(params.grid_n));
    }
    const int n = u.n();
    const double inv_h = 1.0 / params.h;
    const double half_gamma = 0.5 * params.gamma;
    const double quarter_kappa = 0.25 * params.kappa;

    CompensatedSum acc;
    for (int i = 0; i < n - 1; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d = (u(i + 1, j) - u(i, j)) * inv_h;
            acc.add(half_gamma * d * d);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n - 1; ++j) {
            const double d = (u(i, j + 1) - u(i, j)) * inv_h;
            acc.add(half_gamma * d * d);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double w = u(i, j) * u(i, j) - 1.0;
            acc.add(quarter_kappa * w * w);
        }
    }
    return params.h * params.h * acc.value();
}

double energy_loss(const Field& pred, const Field& tar, const PdeParams& params,
                   EnergyMatch mode) {
    require_same_shape(pred, tar);
    const double d = lyapunov_energy(pred, params) - lyapunov_energy(tar, params);
    return mode == EnergyMatch::Abs ? std::abs(d) : d * d;
}

MomentLosses moment_losses(const Field& pred, const Field& tar) {
    require_same_shape(pred, tar);
    const FieldStats sp = field_stats(pred);
    const FieldStats st = field_stats(tar);
    const double dm = sp.mean - st.mean;
    const double dv = sp.variance - st.variance;
    return {dm * dm, dv * dv};
}

double pixel_mae(const Field& pred, const Field& tar) {
    require_same_shape(pred, tar);
    const auto a = pred.values();
    const auto b = tar.values();
    CompensatedSum acc;
    for (size_t k = 0; k < a.size(); ++k) acc.add(std::abs(a[k] - b[k]));
    return acc.value() / static_cast<double>(a.size());
}

double residual_loss(const Field& pred_scaled, const Field& src_scaled,
                     const PdeParams& params, double scale, int s) {
    require_same_shape(pred_scaled, src_scaled);
    if (pred_scaled.n() != params.grid_n) {
        throw ShapeError("field side does not match grid_n");
    }
    if (!(scale > 0.0)) {
        throw ConfigError("scale must be > 0");
    }
    if (s < 0) {
        throw ConfigError("residual step count must be >= 0");
    }

    const int n = pred_scaled.n();
    Field u0(n, params.bc_value);
    for (int i = 1; i < n - 1; ++i) {
        for (int j = 1; j < n - 1; ++j) {
            u0(i, j) = pred_scaled(i, j) / scale;
        }
    }
    const Field u_sim = simulate(u0, params, s);

    const auto sim = u_sim.values();
    const auto src = src_scaled.values();
    CompensatedSum acc;
    for (size_t k = 0; k < sim.size(); ++k) {
        acc.add(std::abs(scale * sim[k] - src[k]));
    }
    return acc.value() / static_cast<double>(sim.size());
}

} // namespace cilab
