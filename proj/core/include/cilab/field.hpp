#pragma once

#include <span>
#include <vector>

#include "cilab/errors.hpp"

namespace cilab {

/// Square sample of u on [-1,1]^2, boundary nodes included: n x n values in
/// row-major order, index (i = row/y, j = col/x), grid spacing h = 2/(n-1).
/// Values are stored in double precision; files serialize them as f32.
class Field {
public:
    Field() = default;
    Field(int n, double fill) : n_(n), values_(static_cast<size_t>(n) * n, fill) {}

    int n() const { return n_; }
    size_t size() const { return values_.size(); }

    double operator()(int i, int j) const { return values_[static_cast<size_t>(i) * n_ + j]; }
    double& operator()(int i, int j) { return values_[static_cast<size_t>(i) * n_ + j]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool operator==(const Field&) const = default;

private:
    int n_ = 0;
    std::vector<double> values_;
};

/// Parameters of the discrete forward operator: u_t = gamma*Lap(u) - kappa*(u^3 - u),
/// explicit Euler with step dt on an n x n grid with Dirichlet value bc_value.
struct PdeParams {
    double gamma = 0.005;   ///< diffusion coefficient
    double kappa = 4.7;     ///< reaction coefficient
    double dt = 1e-3;       ///< time step
    int n_steps = 100;      ///< forward step count used for dataset generation
    int grid_n = 128;       ///< nodes per side, boundary included
    double bc_value = 0.0;  ///< Dirichlet boundary value
    double h = 2.0 / 127.0; ///< derived spacing 2/(grid_n-1)

    /// Validated construction; rejects bad ranges and unstable (gamma, dt, h)
    /// combinations. This is the only intended way to obtain a PdeParams.
    static PdeParams create(double gamma, double kappa, double dt, int n_steps,
                            int grid_n, double bc_value = 0.0);
};

/// Explicit-Euler stability margins; both must stay strictly below 1.
struct StabilityReport {
    double diffusion_margin = 0.0; ///< dt / (h^2 / (4*gamma))
    double reaction_margin = 0.0;  ///< dt * 2*kappa, linearized rate at the wells

    bool stable() const { return diffusion_margin < 1.0 && reaction_margin < 1.0; }
};

/// Margins from raw values (no range validation beyond grid_n >= 3).
StabilityReport check_stability(double gamma, double kappa, double dt, int grid_n);
StabilityReport check_stability(const PdeParams& params);

/// Throws StabilityError naming the violated bound when a margin is >= 1.
void require_stable(const StabilityReport& report);

/// n x n field with every value set to fill. Throws GridError for n < 3
/// or non-finite fill.
Field make_field(int n, double fill);

/// 5-point Laplacian (u[i+1,j]+u[i-1,j]+u[i,j+1]+u[i,j-1]-4u[i,j])/h^2 on
/// interior nodes; the boundary ring of the result is 0 (boundary nodes are
/// never updated by the scheme).
Field laplacian_dirichlet(const Field& u, const PdeParams& params);

struct FieldStats {
    double mean = 0.0;
    double variance = 0.0; ///< population convention, divisor n^2
};

FieldStats field_stats(const Field& u);

/// Transpose across the main diagonal; the stencil commutes with this.
Field transposed(const Field& u);

} // namespace cilab
