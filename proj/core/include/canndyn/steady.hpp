// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>

#include "canndyn/grid.hpp"
#include "canndyn/ingredients.hpp"

namespace canndyn {

/// A stationary density with its environment (E*, M*) and the residuals of
/// the solve that produced it.
struct SteadyState {
  double n0 = 0.0;  // boundary density n*(0)
  GridFunction n;
  GridFunction E;
  GridFunction M;
  double residual_fp = 0.0;  // sup-norm change of (E, M) in the last inner sweep
  double residual_R = 0.0;   // |R - 1| for positive states, |R(0) - 1| for the trivial one

  const Grid& grid() const { return n.grid(); }
  const GridPtr& grid_ptr() const { return n.grid_ptr(); }
  bool is_trivial() const { return n0 == 0.0 && n.sup_norm() == 0.0; }
};

struct Feedbacks {
  GridFunction E;
  GridFunction M;
};

/// E(s) = int c(y) alpha(y, s) n(y) dy,  M(s) = int alpha(s, y) n(y) dy.
/// Evaluated term by term, so the cost is O(N) per separable term.
Feedbacks feedbacks_from_density(const ModelSpec& model, const GridFunction& n);

/// Stationary profile for a given environment:
///   n(s) = n0 gamma(0, E(0)) / gamma(s, E(s)) exp(-int_0^s (mu + M) / gamma dy).
/// Throws ModelError if gamma drops below gamma0 on the grid.
GridFunction profile_from_feedbacks(const ModelSpec& model, double n0, const GridFunction& E, const GridFunction& M);

/// Net reproduction number of the standing environment (E, M).
double net_reproduction(const ModelSpec& model, const GridFunction& E, const GridFunction& M);

struct SteadyOptions {
  double n0_lo = 0.0;
  double n0_hi = 1.0;
  double fp_tol = 1e-10;
  double fp_damping = 0.5;
  int max_iter = 10000;
};

/// Positive equilibrium by bisection on n*(0) for R = 1, with a damped Picard
/// iteration on (E, M) started from (0, 0) for every trial n*(0).
/// A bracket [0, 0] returns the trivial state.
/// Throws ConvergenceError when the bracket has no sign change or the inner
/// iteration exceeds max_iter.
SteadyState solve_steady(const ModelSpec& model, const GridPtr& grid, const SteadyOptions& options);

SteadyState trivial_steady(const ModelSpec& model, const GridPtr& grid);

/// Damped inner fixed point for a fixed boundary density. Exposed for tests
/// and diagnostics; residual_R is left at |R - 1|.
SteadyState steady_for_boundary(const ModelSpec& model, const GridPtr& grid, double n0, double fp_tol,
                                double fp_damping, int max_iter);

}  // namespace canndyn
