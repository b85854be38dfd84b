#include "cilab/field.hpp"

#include <cmath>
#include <string>

#include "cilab/summation.hpp"

namespace cilab {

PdeParams PdeParams::create(double gamma, double kappa, double dt, int n_steps,
                            int grid_n, double bc_value) {
    if (grid_n < 3) {
        throw GridError("grid_n must be >= 3, got " + std::to_string(grid_n));
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw StabilityError("gamma must be positive and finite");
    }
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw StabilityError("kappa must be positive and finite");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw StabilityError("dt must be positive and finite");
    }
    if (n_steps < 0) {
        throw StabilityError("n_steps must be >= 0");
    }
    if (!std::isfinite(bc_value)) {
        throw GridError("bc_value must be finite");
    }
    require_stable(check_stability(gamma, kappa, dt, grid_n));

    PdeParams p;
    p.gamma = gamma;
    p.kappa = kappa;
    p.dt = dt;
    p.n_steps = n_steps;
    p.grid_n = grid_n;
    p.bc_value = bc_value;
    p.h = 2.0 / (grid_n - 1);
    return p;
}

StabilityReport check_stability(double gamma, double kappa, double dt, int grid_n) {
    if (grid_n < 3) {
        throw GridError("grid_n must be >= 3, got " + std::to_string(grid_n));
    }
    const double h = 2.0 / (grid_n - 1);
    StabilityReport r;
    r.diffusion_margin = dt / (h * h / (4.0 * gamma));
    r.reaction_margin = dt * 2.0 * kappa;
    return r;
}

StabilityReport check_stability(const PdeParams& params) {
    return check_stability(params.gamma, params.kappa, params.dt, params.grid_n);
}

void require_stable(const StabilityReport& report) {
    if (report.diffusion_margin >= 1.0) {
        throw StabilityError("diffusion margin " + std::to_string(report.diffusion_margin) +
                             " >= 1: dt must stay below h^2/(4*gamma)");
    }
    if (report.reaction_margin >= 1.0) {
        throw StabilityError("reaction margin " + std::to_string(report.reaction_margin) +
                             " >= 1: dt must stay below 1/(2*kappa)");
    }
}

Field make_field(int n, double fill) {
    if (n < 3) {
        throw GridError("field side must be >= 3, got " + std::to_string(n));
    }
    if (!std::isfinite(fill)) {
        throw GridError("fill value must be finite");
    }
    return Field(n, fill);
}

Field laplacian_dirichlet(const Field& u, const PdeParams& params) {
    if (u.n() != params.grid_n) {
        throw ShapeError("field side " + std::to_string(u.n()) +
                         " does not match grid_n " + std::to_string(params.grid_n));
    }
    const int n = u.n();
    const double inv_h2 = 1.0 / (params.h * params.h);
    Field out(n, 0.0);
    for (int i = 1; i < n - 1; ++i) {
        for (int j = 1; j < n - 1; ++j) {
            out(i, j) = (u(i - 1, j) + u(i + 1, j) + u(i, j - 1) + u(i, j + 1) -
                         4.0 * u(i, j)) * inv_h2;
        }
    }
    return out;
}

FieldStats field_stats(const Field& u) {
    const auto vals = u.values();
    const double inv_count = 1.0 / static_cast<double>(vals.size());

    CompensatedSum sum;
    for (double v : vals) sum.add(v);
    const double mean = sum.value() * inv_count;

    CompensatedSum sq;
    for (double v : vals) {
        const double d = v - mean;
        sq.add(d * d);
    }
    return {mean, sq.value() * inv_count};
}

Field transposed(const Field& u) {
    const int n = u.n();
    Field out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out(j, i) = u(i, j);
        }
    }
    return out;
}

} // namespace cilab
