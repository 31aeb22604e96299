// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "canndyn/grid.hpp"
#include "canndyn/ingredients.hpp"
#include "canndyn/linearization.hpp"

namespace canndyn {

enum class SimMode { nonlinear, linearized };

struct SimConfig {
  std::optional<double> dt;  // fixed step; otherwise derived from cfl
  double cfl = 0.9;
  double t_end = 10.0;
  int record_every = 1;
  SimMode mode = SimMode::nonlinear;
  std::vector<double> snapshot_times;
};

struct SimReport {
  std::vector<double> times;
  std::vector<double> norms;            // ||n(., t)||_1
  std::vector<double> boundary_values;  // n(0, t)
  std::vector<double> window_rates;     // d/dt ln ||n|| between consecutive records
  std::vector<double> profile_distance; // L1 distance of normalized profile to the final one
  std::vector<double> mass_residuals;
  std::vector<double> min_values;
  std::vector<double> sup_norms;        // max_i |n_i|
  double growth_rate = 0.0;             // least-squares slope of ln ||n|| over the final third
  double dt = 0.0;
  GridFunction final_state;
  std::vector<std::pair<double, GridFunction>> snapshots;
};

/// Largest stable step for a state: cfl / (max_i v_i / h_i + max_i sink_i),
/// with v the transport speed and sink the local loss rate. Keeps every update
/// coefficient nonnegative, so the scheme preserves positivity.
double stable_dt(const ModelSpec& model, const GridFunction& state, const Linearization* lin, SimMode mode,
                 double cfl);

/// One explicit first-order upwind step. Nonlinear mode recomputes E, M from
/// the state and solves the renewal boundary gamma(0, E(0)) n(0) = int beta n;
/// linearized mode uses the frozen starred coefficients, the finite-rank C
/// action and u(0) = int lambda_weight u. Throws DomainError on a CFL
/// violation, a missing linearization or a non-positive growth rate.
GridFunction step(const ModelSpec& model, const GridFunction& state, const Linearization* lin, double dt,
                  SimMode mode);

/// |d/dt int n - (influx - int sink - outflow)| / ||n||_1 between two
/// consecutive states, using the before-state for the right-hand side.
double mass_balance_residual(const ModelSpec& model, const GridFunction& before, const GridFunction& after, double dt,
                             const Linearization* lin = nullptr, SimMode mode = SimMode::nonlinear);

/// Runs `step` to t_end. Throws DomainError for negative initial data in
/// nonlinear mode, ConvergenceError when the state turns non-finite.
SimReport simulate(const ModelSpec& model, const GridFunction& initial, const SimConfig& config,
                   const Linearization* lin = nullptr);

struct AegDiagnostic {
  bool applicable = false;  // false for decaying runs
  bool detected = false;
  GridFunction limit_profile;
};

/// Detected when the profile distance is non-increasing (up to round-off) over
/// the final half of the records and has fallen below `tol` three quarters of
/// the way in. The final record is the reference profile, so its own distance
/// is always 0 and says nothing.
AegDiagnostic aeg_diagnostic(const SimReport& report, double tol);

}  // namespace canndyn
