// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "canndyn/grid.hpp"
#include "canndyn/ingredients.hpp"
#include "canndyn/steady.hpp"

namespace canndyn {

/// One separable term of the perturbation kernel
///   K_C(y, s) = sum_k [ c(y) a1_k(y) g1_k(s) + a2_k(y) g2_k(s) ],
/// so that (C u)(s) = -sum_k [ ubar1_k g1_k(s) + ubar2_k g2_k(s) ] with
/// ubar1_k = int c a1_k u and ubar2_k = int a2_k u.
struct KernelComponent {
  GridFunction prey_weight;    // c * alpha1_k
  GridFunction attack_weight;  // alpha2_k
  GridFunction g1;             // alpha2 ((gamma_E n*)_s + mu_E n*) + alpha2' gamma_E n*
  GridFunction g2;             // alpha1 n*
  double g3 = 0.0;             // gamma_E(0, E*(0)) n*(0) alpha2(0) / gamma*(0)
};

/// Coefficients of the problem linearized about a stationary state.
struct Linearization {
  SteadyState state;
  GridFunction gamma_star;     // gamma(s, E*(s))
  GridFunction gamma_star_s;   // d/ds gamma*(s), by grid differentiation
  GridFunction mu_star;        // mu(s, E*(s))
  GridFunction mu_env;         // mu_E(s, E*(s))
  GridFunction gamma_env;      // gamma_E(s, E*(s))
  GridFunction sink;           // mu* + M*
  GridFunction rho_star;       // mu* + gamma*_s + M*
  GridFunction lambda_weight;  // boundary functional: u(0) = int lambda_weight u
  std::vector<KernelComponent> terms;
  double mu0 = 0.0;            // min over nodes of mu* + M*

  const Grid& grid() const { return state.grid(); }
  const GridPtr& grid_ptr() const { return state.grid_ptr(); }

  /// Strictly separable accessors; throw DomainError for multi-term kernels.
  const KernelComponent& single_term() const;
  const GridFunction& g1() const { return single_term().g1; }
  const GridFunction& g2() const { return single_term().g2; }
  double g3() const { return single_term().g3; }

  /// K_C(y_i, s_j) at grid nodes i, j.
  double kernel(std::size_t i, std::size_t j) const;
  /// (C u) at every node.
  GridFunction apply_c(const GridFunction& u) const;
};

Linearization build_linearization(const ModelSpec& model, const SteadyState& state);

struct PositivityReport {
  bool pos1 = false;  // C-kernel <= 0 at every node pair
  bool pos2 = false;  // boundary functional nonnegative
  bool aeg_hypotheses_met = false;
};

struct StabilityVerdict {
  double margin = 0.0;  // also the exported decay rate kappa: ||T(t)|| <= exp(-kappa t)
  bool stable_by_dissipativity = false;
  GridFunction margin_profile;
  bool positivity_pos1 = false;
  bool positivity_pos2 = false;
  bool aeg_hypotheses_met = false;
};

/// Pointwise slack of the dissipativity condition,
///   kappa(s) = mu* + M* - |beta - gamma_E(0) n*(0) c alpha(s, 0)| - int |K_C(s, y)| dy,
/// its minimum over the grid, and the positivity flags.
StabilityVerdict dissipativity_margin(const ModelSpec& model, const Linearization& lin);

PositivityReport positivity_check(const ModelSpec& model, const Linearization& lin);

struct TrivialCheck {
  bool stable = false;        // mu(s, 0) > beta(s) at every node
  double R0 = 0.0;            // net reproduction of the empty population
  bool implication_holds = true;  // stable => R0 < 1
};

TrivialCheck trivial_stability_check(const ModelSpec& model, const GridPtr& grid);

}  // namespace canndyn
