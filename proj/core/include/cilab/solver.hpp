#pragma once

#include <vector>

#include "cilab/field.hpp"

namespace cilab {

// The discrete forward operator F. One explicit Euler step of
//
//   u_t = gamma*Lap(u) - kappa*(u^3 - u)
//
// under Dirichlet boundary conditions: interior nodes get the stencil
// update, the boundary ring is rewritten to bc_value after every step.
// The residual training loss replays this exact operator (same stencil,
// same constants), which is the consistency requirement the whole
// pipeline is built around.

/// One step. Throws ShapeError when u.n() != params.grid_n.
Field euler_step(const Field& u, const PdeParams& params);

/// euler_step composed `steps` times; steps == 0 returns u0 unchanged.
Field simulate(const Field& u0, const PdeParams& params, int steps);

/// Snapshots at steps {0, record_every, 2*record_every, ...}; the final
/// step is always included. record_every must be >= 1.
std::vector<Field> simulate_trajectory(const Field& u0, const PdeParams& params,
                                       int steps, int record_every);

} // namespace cilab
