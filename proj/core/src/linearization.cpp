// SPDX-License-Identifier: Apache-2.0
#include "canndyn/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "canndyn/error.hpp"

namespace canndyn {

const KernelComponent& Linearization::single_term() const {
  if (terms.size() != 1) {
    throw DomainError("g1, g2, g3 are only defined for a strictly separable attack kernel");
  }
  return terms.front();
}

double Linearization::kernel(std::size_t i, std::size_t j) const {
  double k = 0.0;
  for (const auto& t : terms) k += t.prey_weight[i] * t.g1[j] + t.attack_weight[i] * t.g2[j];
  return k;
}

GridFunction Linearization::apply_c(const GridFunction& u) const {
  GridFunction out(u.grid_ptr());
  const auto w = u.grid().weights();
  for (const auto& t : terms) {
    double ubar1 = 0.0;
    double ubar2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      ubar1 += w[i] * t.prey_weight[i] * u[i];
      ubar2 += w[i] * t.attack_weight[i] * u[i];
    }
    for (std::size_t j = 0; j < u.size(); ++j) out[j] -= ubar1 * t.g1[j] + ubar2 * t.g2[j];
  }
  return out;
}

Linearization build_linearization(const ModelSpec& model, const SteadyState& state) {
  const GridPtr& grid = state.grid_ptr();
  const std::size_t n = grid->size();
  const auto& E = state.E;
  const auto& M = state.M;
  const auto& dens = state.n;

  Linearization lin{state,
                    GridFunction(grid),
                    GridFunction(grid),
                    GridFunction(grid),
                    GridFunction(grid),
                    GridFunction(grid),
                    GridFunction(grid),
                    GridFunction(grid),
                    GridFunction(grid),
                    {},
                    0.0};

  for (std::size_t i = 0; i < n; ++i) {
    const double s = grid->node(i);
    lin.gamma_star[i] = model.gamma(s, E[i]);
    if (!(lin.gamma_star[i] >= model.gamma0)) throw ModelError("gamma* below gamma0 on the grid");
    lin.mu_star[i] = model.mu(s, E[i]);
    lin.mu_env[i] = model.mu.d_env(E[i]);
    lin.gamma_env[i] = model.gamma.d_env(E[i]);
    lin.sink[i] = lin.mu_star[i] + M[i];
  }
  lin.gamma_star_s = grid_derivative(lin.gamma_star);
  for (std::size_t i = 0; i < n; ++i) lin.rho_star[i] = lin.sink[i] + lin.gamma_star_s[i];
  lin.mu0 = lin.sink.min();

  const double gamma0_star = lin.gamma_star[0];
  const double boundary_shift = lin.gamma_env[0] * state.n0;  // gamma_E(0, E*(0)) n*(0)
  for (std::size_t i = 0; i < n; ++i) {
    const double s = grid->node(i);
    lin.lambda_weight[i] = (model.beta(s) - boundary_shift * model.c(s) * model.alpha(s, 0.0)) / gamma0_star;
  }

  GridFunction growth_flux(grid);  // gamma_E n*
  for (std::size_t i = 0; i < n; ++i) growth_flux[i] = lin.gamma_env[i] * dens[i];
  const GridFunction growth_flux_s = grid_derivative(growth_flux);

  for (const auto& term : model.alpha.terms()) {
    KernelComponent kc{GridFunction(grid), GridFunction(grid), GridFunction(grid), GridFunction(grid), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double s = grid->node(i);
      const double a1 = term.alpha1(s);
      const double a2 = term.alpha2(s);
      kc.prey_weight[i] = model.c(s) * a1;
      kc.attack_weight[i] = a2;
      kc.g1[i] = a2 * (growth_flux_s[i] + lin.mu_env[i] * dens[i]) + term.alpha2.derivative(s) * growth_flux[i];
      kc.g2[i] = a1 * dens[i];
    }
    kc.g3 = boundary_shift * term.alpha2(0.0) / gamma0_star;
    lin.terms.push_back(std::move(kc));
  }
  return lin;
}

PositivityReport positivity_check(const ModelSpec& model, const Linearization& lin) {
  const std::size_t n = lin.grid().size();
  PositivityReport rep;

  double kmax = 0.0;
  double kscale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double k = lin.kernel(i, j);
      kmax = std::max(kmax, k);
      kscale = std::max(kscale, std::abs(k));
    }
  }
  rep.pos1 = kmax <= 1e-12 * kscale;

  rep.pos2 = true;
  const double shift = lin.gamma_env[0] * lin.state.n0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = lin.grid().node(i);
    if (model.beta(s) - shift * model.c(s) * model.alpha(s, 0.0) < 0.0) rep.pos2 = false;
  }
  // Every kernel here is a finite sum of separable terms, so C has finite rank.
  rep.aeg_hypotheses_met = rep.pos1 && rep.pos2 && lin.mu0 > 0.0;
  return rep;
}

StabilityVerdict dissipativity_margin(const ModelSpec& model, const Linearization& lin) {
  const auto& grid = lin.grid();
  const std::size_t n = grid.size();
  const auto w = grid.weights();
  const double shift = lin.gamma_env[0] * lin.state.n0;

  StabilityVerdict v;
  v.margin_profile = GridFunction(lin.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) {
    const double s = grid.node(i);
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += w[j] * std::abs(lin.kernel(i, j));
    v.margin_profile[i] = lin.sink[i] - std::abs(model.beta(s) - shift * model.c(s) * model.alpha(s, 0.0)) - row;
  }
  v.margin = v.margin_profile.min();
  v.stable_by_dissipativity = v.margin > 0.0;

  const PositivityReport pos = positivity_check(model, lin);
  v.positivity_pos1 = pos.pos1;
  v.positivity_pos2 = pos.pos2;
  v.aeg_hypotheses_met = pos.aeg_hypotheses_met;
  return v;
}

TrivialCheck trivial_stability_check(const ModelSpec& model, const GridPtr& grid) {
  TrivialCheck out;
  out.stable = true;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double s = grid->node(i);
    if (!(model.mu(s, 0.0) > model.beta(s))) out.stable = false;
  }
  const GridFunction zero(grid);
  out.R0 = net_reproduction(model, zero, zero);
  out.implication_holds = !out.stable || out.R0 < 1.0;
  return out;
}

}  // namespace canndyn
