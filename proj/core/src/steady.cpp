// SPDX-License-Identifier: Apache-2.0
#include "canndyn/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "canndyn/error.hpp"

namespace canndyn {

namespace {

/// exp(-int_0^s (mu + M)/gamma) / gamma(s, E(s)) at every node.
GridFunction survival_over_growth(const ModelSpec& model, const GridFunction& E, const GridFunction& M) {
  const auto& grid = E.grid();
  GridFunction rate(E.grid_ptr());
  GridFunction inv_gamma(E.grid_ptr());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid.node(i);
    const double g = model.gamma(s, E[i]);
    if (!(g >= model.gamma0)) {
      throw ModelError(fmt::format("gamma = {} below gamma0 = {} at s = {}", g, model.gamma0, s));
    }
    inv_gamma[i] = 1.0 / g;
    rate[i] = (model.mu(s, E[i]) + M[i]) * inv_gamma[i];
  }
  const GridFunction cum = cumulative_integral(rate);
  for (std::size_t i = 0; i < grid.size(); ++i) inv_gamma[i] *= std::exp(-cum[i]);
  return inv_gamma;
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

Feedbacks feedbacks_from_density(const ModelSpec& model, const GridFunction& n) {
  const auto& grid = n.grid();
  const auto w = grid.weights();
  Feedbacks out{GridFunction(n.grid_ptr()), GridFunction(n.grid_ptr())};
  for (const auto& term : model.alpha.terms()) {
    // alpha(y, s) = a1(y) a2(s): E picks up a2(s) int c a1 n, M picks up a1(s) int a2 n.
    double prey = 0.0;
    double hunters = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double s = grid.node(i);
      prey += w[i] * model.c(s) * term.alpha1(s) * n[i];
      hunters += w[i] * term.alpha2(s) * n[i];
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double s = grid.node(j);
      out.E[j] += term.alpha2(s) * prey;
      out.M[j] += term.alpha1(s) * hunters;
    }
  }
  return out;
}

GridFunction profile_from_feedbacks(const ModelSpec& model, double n0, const GridFunction& E, const GridFunction& M) {
  if (n0 < 0.0) throw DomainError("profile_from_feedbacks requires n0 >= 0");
  GridFunction n = survival_over_growth(model, E, M);
  const double scale = n0 * model.gamma(0.0, E[0]);
  for (std::size_t i = 0; i < n.size(); ++i) n[i] *= scale;
  n[0] = n0;
  return n;
}

double net_reproduction(const ModelSpec& model, const GridFunction& E, const GridFunction& M) {
  GridFunction integrand = survival_over_growth(model, E, M);
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] *= model.beta(E.grid().node(i));
  return integrate(integrand);
}

SteadyState steady_for_boundary(const ModelSpec& model, const GridPtr& grid, double n0, double fp_tol,
                                double fp_damping, int max_iter) {
  if (!(fp_damping > 0.0 && fp_damping <= 1.0)) throw DomainError("fp_damping must lie in (0, 1]");
  GridFunction E(grid);
  GridFunction M(grid);
  GridFunction n = profile_from_feedbacks(model, n0, E, M);
  double change = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Feedbacks fb = feedbacks_from_density(model, n);
    change = std::max(sup_diff(fb.E, E), sup_diff(fb.M, M));
    if (!std::isfinite(change)) throw ConvergenceError("fixed-point iteration produced non-finite feedbacks");
    if (change < fp_tol) {
      // Accept the recomputed feedbacks so that E, M are consistent with n.
      E = fb.E;
      M = fb.M;
      n = profile_from_feedbacks(model, n0, E, M);
      SteadyState st{n0, n, E, M, change, 0.0};
      st.residual_R = std::abs(net_reproduction(model, E, M) - 1.0);
      return st;
    }
    for (std::size_t i = 0; i < E.size(); ++i) {
      E[i] = (1.0 - fp_damping) * E[i] + fp_damping * fb.E[i];
      M[i] = (1.0 - fp_damping) * M[i] + fp_damping * fb.M[i];
    }
    n = profile_from_feedbacks(model, n0, E, M);
  }
  throw ConvergenceError(fmt::format("fixed-point iteration did not converge in {} iterations (n0 = {}, change = {})",
                                     max_iter, n0, change));
}

SteadyState trivial_steady(const ModelSpec& /*model*/, const GridPtr& grid) {
  return SteadyState{0.0, GridFunction(grid), GridFunction(grid), GridFunction(grid), 0.0, 0.0};
}

SteadyState solve_steady(const ModelSpec& model, const GridPtr& grid, const SteadyOptions& opt) {
  if (!(opt.n0_lo >= 0.0) || !(opt.n0_hi >= opt.n0_lo)) throw DomainError("n0 bracket must satisfy 0 <= lo <= hi");
  if (!(opt.fp_tol > 0.0)) throw DomainError("fp_tol must be > 0");

  if (opt.n0_hi == 0.0) {
    SteadyState st = trivial_steady(model, grid);
    st.residual_R = std::abs(net_reproduction(model, st.E, st.M) - 1.0);
    return st;
  }

  auto solve_at = [&](double n0) {
    // Tighter inner tolerance keeps the noise in R - 1 below the outer tolerance.
    return steady_for_boundary(model, grid, n0, 0.1 * opt.fp_tol, opt.fp_damping, opt.max_iter);
  };
  auto excess = [&](const SteadyState& st) {
    return net_reproduction(model, st.E, st.M) - 1.0;
  };

  double lo = opt.n0_lo;
  double hi = opt.n0_hi;
  if (lo == hi) {
    SteadyState st = solve_at(lo);
    if (std::abs(excess(st)) < opt.fp_tol) return st;
    throw ConvergenceError("no positive equilibrium found in bracket");
  }

  SteadyState st_lo = solve_at(lo);
  SteadyState st_hi = solve_at(hi);
  double f_lo = excess(st_lo);
  const double f_hi = excess(st_hi);
  if (f_lo * f_hi > 0.0 && std::min(std::abs(f_lo), std::abs(f_hi)) >= opt.fp_tol) {
    throw ConvergenceError(fmt::format("no positive equilibrium found in bracket [{}, {}] (R - 1 = {} and {})", lo,
                                       hi, f_lo, f_hi));
  }

  SteadyState best = std::abs(f_lo) <= std::abs(f_hi) ? st_lo : st_hi;
  double best_f = std::min(std::abs(f_lo), std::abs(f_hi));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    SteadyState st = solve_at(mid);
    const double f_mid = excess(st);
    if (std::abs(f_mid) < best_f) {
      best = st;
      best_f = std::abs(f_mid);
    }
    if (std::abs(f_mid) < opt.fp_tol) return st;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  if (best_f < opt.fp_tol && best.n0 > 0.0) return best;
  throw ConvergenceError(fmt::format("bisection on n0 stalled with |R - 1| = {}", best_f));
}

}  // namespace canndyn
