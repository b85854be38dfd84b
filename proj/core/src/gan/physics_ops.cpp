#include "cilab/gan/physics_ops.hpp"

#include <stdexcept>
#include <string>

#include "cilab/errors.hpp"

namespace cilab::gan {

namespace {

using torch::indexing::Slice;

std::string shape_str(const torch::Tensor& t) {
    std::string s = "[";
    for (int64_t i = 0; i < t.dim(); ++i) {
        if (i) s += ",";
        s += std::to_string(t.size(i));
    }
    return s + "]";
}

void require_batch(const torch::Tensor& u, const char* what) {
    if (u.dim() != 4 || u.size(1) != 1 || u.size(2) != u.size(3) || u.size(2) < 3) {
        throw ShapeError(std::string(what) + " expects [B,1,n,n] with n >= 3, got " +
                         shape_str(u));
    }
}

void require_grid(const torch::Tensor& u, const PdeParams& params, const char* what) {
    require_batch(u, what);
    if (u.size(2) != params.grid_n) {
        throw ShapeError(std::string(what) + ": field side " + std::to_string(u.size(2)) +
                         " does not match grid_n " + std::to_string(params.grid_n));
    }
}

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
    if (!a.sizes().equals(b.sizes())) {
        throw ShapeError(std::string(what) + ": shapes differ, " + shape_str(a) + " vs " +
                         shape_str(b));
    }
}

/// Per-sample mean over channel and spatial dims: [B,1,n,n] -> [B].
torch::Tensor sample_mean(const torch::Tensor& t) {
    return t.flatten(1).mean(1);
}

torch::Tensor sample_sum(const torch::Tensor& t) {
    return t.flatten(1).sum(1);
}

} // namespace

torch::Tensor euler_step_t(const torch::Tensor& u, const PdeParams& params) {
    require_grid(u, params, "euler_step_t");
    const auto n = u.size(2);
    const double inv_h2 = 1.0 / (params.h * params.h);

    const auto c = u.index({Slice(), Slice(), Slice(1, n - 1), Slice(1, n - 1)});
    const auto up = u.index({Slice(), Slice(), Slice(0, n - 2), Slice(1, n - 1)});
    const auto down = u.index({Slice(), Slice(), Slice(2, n), Slice(1, n - 1)});
    const auto left = u.index({Slice(), Slice(), Slice(1, n - 1), Slice(0, n - 2)});
    const auto right = u.index({Slice(), Slice(), Slice(1, n - 1), Slice(2, n)});

    const auto lap = (up + down + left + right - 4.0 * c) * inv_h2;
    const auto next = c + params.dt * (params.gamma * lap - params.kappa * (c * c * c - c));
    return torch::constant_pad_nd(next, {1, 1, 1, 1}, params.bc_value);
}

torch::Tensor simulate_t(torch::Tensor u, const PdeParams& params, int steps) {
    require_grid(u, params, "simulate_t");
    if (steps < 0) {
        throw std::invalid_argument("steps must be >= 0");
    }
    for (int s = 0; s < steps; ++s) {
        u = euler_step_t(u, params);
    }
    return u;
}

torch::Tensor force_boundary(const torch::Tensor& u, double bc_value) {
    require_batch(u, "force_boundary");
    const auto n = u.size(2);
    const auto interior = u.index({Slice(), Slice(), Slice(1, n - 1), Slice(1, n - 1)});
    return torch::constant_pad_nd(interior, {1, 1, 1, 1}, bc_value);
}

torch::Tensor lyapunov_energy_t(const torch::Tensor& u, const PdeParams& params) {
    require_grid(u, params, "lyapunov_energy_t");
    const auto n = u.size(2);
    const double inv_h = 1.0 / params.h;

    const auto di = (u.index({Slice(), Slice(), Slice(1, n), Slice()}) -
                     u.index({Slice(), Slice(), Slice(0, n - 1), Slice()})) * inv_h;
    const auto dj = (u.index({Slice(), Slice(), Slice(), Slice(1, n)}) -
                     u.index({Slice(), Slice(), Slice(), Slice(0, n - 1)})) * inv_h;
    const auto w = u * u - 1.0;

    const auto grad_part = sample_sum(di * di) + sample_sum(dj * dj);
    const auto pot_part = sample_sum(w * w);
    return params.h * params.h *
           (0.5 * params.gamma * grad_part + 0.25 * params.kappa * pot_part);
}

torch::Tensor energy_loss_t(const torch::Tensor& pred, const torch::Tensor& tar,
                            const PdeParams& params, EnergyMatch mode) {
    require_same_shape(pred, tar, "energy_loss_t");
    const auto d = lyapunov_energy_t(pred, params) - lyapunov_energy_t(tar, params);
    return mode == EnergyMatch::Abs ? d.abs() : d * d;
}

torch::Tensor pixel_mae_t(const torch::Tensor& pred, const torch::Tensor& tar) {
    require_batch(pred, "pixel_mae_t");
    require_same_shape(pred, tar, "pixel_mae_t");
    return sample_mean((pred - tar).abs());
}

MomentLossesT moment_losses_t(const torch::Tensor& pred, const torch::Tensor& tar) {
    require_batch(pred, "moment_losses_t");
    require_same_shape(pred, tar, "moment_losses_t");

    const auto mp = sample_mean(pred);
    const auto mt = sample_mean(tar);
    const auto cp = pred.flatten(1) - mp.unsqueeze(1);
    const auto ct = tar.flatten(1) - mt.unsqueeze(1);
    const auto vp = (cp * cp).mean(1);
    const auto vt = (ct * ct).mean(1);

    const auto dm = mp - mt;
    const auto dv = vp - vt;
    return {dm * dm, dv * dv};
}

torch::Tensor residual_loss_t(const torch::Tensor& pred_scaled,
                              const torch::Tensor& src_scaled,
                              const PdeParams& params, double scale, int s) {
    require_grid(pred_scaled, params, "residual_loss_t");
    require_same_shape(pred_scaled, src_scaled, "residual_loss_t");
    if (!(scale > 0.0)) {
        throw ConfigError("scale must be > 0");
    }
    if (s < 0) {
        throw ConfigError("residual step count must be >= 0");
    }

    const auto u0 = force_boundary(pred_scaled / scale, params.bc_value);
    const auto sim = simulate_t(u0, params, s);
    return sample_mean((scale * sim - src_scaled).abs());
}

} // namespace cilab::gan
