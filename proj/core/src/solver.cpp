#include "cilab/solver.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace cilab {

namespace {

void step_into(Field& out, const Field& u, const PdeParams& p) {
    const int n = u.n();
    const double inv_h2 = 1.0 / (p.h * p.h);
    const double dt = p.dt;
    const double gamma = p.gamma;
    const double kappa = p.kappa;

    for (int i = 1; i < n - 1; ++i) {
        for (int j = 1; j < n - 1; ++j) {
            const double c = u(i, j);
            const double lap = (u(i - 1, j) + u(i + 1, j) + u(i, j - 1) + u(i, j + 1) -
                                4.0 * c) * inv_h2;
            out(i, j) = c + dt * (gamma * lap - kappa * (c * c * c - c));
        }
    }
    for (int j = 0; j < n; ++j) {
        out(0, j) = p.bc_value;
        out(n - 1, j) = p.bc_value;
    }
    for (int i = 1; i < n - 1; ++i) {
        out(i, 0) = p.bc_value;
        out(i, n - 1) = p.bc_value;
    }
}

void require_shape(const Field& u, const PdeParams& p) {
    if (u.n() != p.grid_n) {
        throw ShapeError("field side " + std::to_string(u.n()) +
                         " does not match grid_n " + std::to_string(p.grid_n));
    }
}

} // namespace

Field euler_step(const Field& u, const PdeParams& params) {
    require_shape(u, params);
    Field out(u.n(), 0.0);
    step_into(out, u, params);
    return out;
}

Field simulate(const Field& u0, const PdeParams& params, int steps) {
    require_shape(u0, params);
    if (steps < 0) {
        throw std::invalid_argument("steps must be >= 0");
    }
    if (steps == 0) return u0;

    Field cur = u0;
    Field next(u0.n(), 0.0);
    for (int s = 0; s < steps; ++s) {
        step_into(next, cur, params);
        std::swap(cur, next);
    }
    return cur;
}

std::vector<Field> simulate_trajectory(const Field& u0, const PdeParams& params,
                                       int steps, int record_every) {
    require_shape(u0, params);
    if (steps < 0) {
        throw std::invalid_argument("steps must be >= 0");
    }
    if (record_every < 1) {
        throw std::invalid_argument("record_every must be >= 1");
    }

    std::vector<Field> snapshots;
    snapshots.push_back(u0);

    Field cur = u0;
    Field next(u0.n(), 0.0);
    for (int s = 1; s <= steps; ++s) {
        step_into(next, cur, params);
        std::swap(cur, next);
        if (s % record_every == 0 || s == steps) {
            snapshots.push_back(cur);
        }
    }
    return snapshots;
}

} // namespace cilab
