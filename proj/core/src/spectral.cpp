// SPDX-License-Identifier: Apache-2.0
#include "canndyn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "canndyn/error.hpp"

namespace canndyn {

namespace {

void require_domain(const Linearization& lin, double lambda) {
  if (!(lambda > -lin.mu0) || !std::isfinite(lambda)) {
    throw DomainError(fmt::format("lambda = {} outside the domain lambda > -mu0 = {}", lambda, -lin.mu0));
  }
}

/// X(s) = -ln pi(s, lambda).
GridFunction pi_exponent(const Linearization& lin, double lambda) {
  const std::size_t n = lin.grid().size();
  GridFunction rate(lin.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) rate[i] = (lin.sink[i] + lambda) / lin.gamma_star[i];
  GridFunction x = cumulative_integral(rate);
  const double g0 = lin.gamma_star[0];
  for (std::size_t i = 0; i < n; ++i) x[i] += std::log(lin.gamma_star[i] / g0);
  return x;
}

GridFunction discounted(const Linearization& lin, const GridFunction& x, const GridFunction& g) {
  const auto& grid = lin.grid();
  GridFunction j(lin.grid_ptr());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double decay = std::exp(-(x[i] - x[i - 1]));
    const double left = g[i - 1] / lin.gamma_star[i - 1];
    const double right = g[i] / lin.gamma_star[i];
    j[i] = decay * j[i - 1] + 0.5 * grid.width(i - 1) * (decay * left + right);
  }
  return j;
}

double weighted(const GridFunction& weight, const GridFunction& f) {
  const auto w = f.grid().weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * weight[i] * f[i];
  return sum;
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

Matrix3 characteristic_matrix(const CharacteristicSample& cs, double g3) {
  const auto& a = cs.a;
  return {{{a[0], 1.0 + a[1], a[2]}, {a[3], a[4], 1.0 + a[5]}, {1.0 + a[6], g3 + a[7], a[8]}}};
}

double det3(const Matrix3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::array<double, 3> cross(const std::array<double, 3>& u, const std::array<double, 3>& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

std::vector<Root> scan_roots(const std::function<double(double)>& f, double lo, double hi, int n_scan,
                             double root_tol) {
  if (n_scan < 2) throw DomainError("scan requires at least 2 points");
  if (!(hi > lo)) throw DomainError("scan range must satisfy lo < hi");
  std::vector<double> xs(static_cast<std::size_t>(n_scan));
  std::vector<double> fs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_scan - 1);
    fs[i] = f(xs[i]);
  }

  std::vector<Root> roots;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (fs[i] == 0.0) {
      roots.push_back({xs[i], xs[i], xs[i], 0.0});
      continue;
    }
    if (fs[i] * fs[i + 1] >= 0.0) continue;
    double a = xs[i];
    double b = xs[i + 1];
    double fa = fs[i];
    double mid = 0.5 * (a + b);
    double fm = f(mid);
    for (int it = 0; it < 200 && std::abs(fm) >= root_tol; ++it) {
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
      if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
      mid = 0.5 * (a + b);
      fm = f(mid);
    }
    roots.push_back({mid, xs[i], xs[i + 1], std::abs(fm)});
  }
  if (fs.back() == 0.0) roots.push_back({xs.back(), xs.back(), xs.back(), 0.0});
  return roots;
}

}  // namespace

GridFunction pi_eval(const Linearization& lin, double lambda) {
  require_domain(lin, lambda);
  GridFunction x = pi_exponent(lin, lambda);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::exp(-x[i]);
  return x;
}

GridFunction discounted_integral(const Linearization& lin, double lambda, const GridFunction& g) {
  require_domain(lin, lambda);
  return discounted(lin, pi_exponent(lin, lambda), g);
}

CharacteristicSample characteristic_K(const ModelSpec& model, const Linearization& lin, double lambda) {
  const KernelComponent& term = lin.single_term();
  require_domain(lin, lambda);

  const GridFunction x = pi_exponent(lin, lambda);
  GridFunction pi(lin.grid_ptr());
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = std::exp(-x[i]);
  const GridFunction j1 = discounted(lin, x, term.g1);
  const GridFunction j2 = discounted(lin, x, term.g2);

  GridFunction birth(lin.grid_ptr());  // beta / gamma*(0)
  for (std::size_t i = 0; i < birth.size(); ++i) birth[i] = model.beta(lin.grid().node(i)) / lin.gamma_star[0];

  CharacteristicSample cs;
  cs.lambda = lambda;
  auto& a = cs.a;
  a[0] = -weighted(term.prey_weight, pi);
  a[1] = weighted(term.prey_weight, j1);
  a[2] = weighted(term.prey_weight, j2);
  a[3] = -weighted(term.attack_weight, pi);
  a[4] = weighted(term.attack_weight, j1);
  a[5] = weighted(term.attack_weight, j2);
  a[6] = -weighted(birth, pi);
  a[7] = weighted(birth, j1);
  a[8] = weighted(birth, j2);
  cs.K = det3(characteristic_matrix(cs, term.g3));
  cs.L = weighted(lin.lambda_weight, pi) - 1.0;
  return cs;
}

double characteristic_L(const Linearization& lin, double lambda) {
  return weighted(lin.lambda_weight, pi_eval(lin, lambda)) - 1.0;
}

double characteristic_L_prime0(const Linearization& lin) {
  const GridFunction pi = pi_eval(lin, 0.0);
  GridFunction inv_gamma(lin.grid_ptr());
  for (std::size_t i = 0; i < inv_gamma.size(); ++i) inv_gamma[i] = 1.0 / lin.gamma_star[i];
  const GridFunction tau = cumulative_integral(inv_gamma);
  GridFunction integrand(lin.grid_ptr());
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = pi[i] * tau[i];
  return -weighted(lin.lambda_weight, integrand);
}

double default_lambda_lo(const Linearization& lin) { return -lin.mu0 + 1e-3 * std::abs(lin.mu0); }

double default_lambda_hi(const Linearization& lin) {
  const double rho_max = std::max(lin.rho_star.max(), std::abs(lin.mu0));
  return 10.0 * std::max(rho_max, 1e-3) / lin.gamma_star.min();
}

std::vector<Root> scan_real_roots_K(const ModelSpec& model, const Linearization& lin, double lo, double hi,
                                    int n_scan, double root_tol) {
  lin.single_term();
  require_domain(lin, lo);
  return scan_roots([&](double l) { return characteristic_K(model, lin, l).K; }, lo, hi, n_scan, root_tol);
}

std::vector<Root> scan_real_roots_L(const Linearization& lin, double lo, double hi, int n_scan, double root_tol) {
  require_domain(lin, lo);
  return scan_roots([&](double l) { return characteristic_L(lin, l); }, lo, hi, n_scan, root_tol);
}

SpectralReport spectral_report(const ModelSpec& model, const Linearization& lin, const SpectralOptions& opt) {
  lin.single_term();
  SpectralReport rep;
  rep.mu0 = lin.mu0;
  rep.lambda_lo = opt.lambda_lo.value_or(default_lambda_lo(lin));
  rep.lambda_hi = opt.lambda_hi.value_or(default_lambda_hi(lin));
  require_domain(lin, rep.lambda_lo);
  if (!(rep.lambda_hi > rep.lambda_lo)) throw DomainError("lambda range must satisfy lo < hi");
  if (opt.n_scan < 2) throw DomainError("scan requires at least 2 points");

  rep.samples.reserve(static_cast<std::size_t>(opt.n_scan));
  for (int i = 0; i < opt.n_scan; ++i) {
    const double l = rep.lambda_lo + (rep.lambda_hi - rep.lambda_lo) * i / (opt.n_scan - 1);
    rep.samples.push_back(characteristic_K(model, lin, l));
  }
  rep.real_roots_K = scan_real_roots_K(model, lin, rep.lambda_lo, rep.lambda_hi, opt.n_scan, opt.root_tol);
  rep.L_roots = scan_real_roots_L(lin, rep.lambda_lo, rep.lambda_hi, opt.n_scan, opt.root_tol);
  if (0.0 > -lin.mu0) {
    rep.K0 = characteristic_K(model, lin, 0.0).K;
    rep.Lprime0 = characteristic_L_prime0(lin);
  } else {
    rep.K0 = std::numeric_limits<double>::quiet_NaN();
    rep.Lprime0 = std::numeric_limits<double>::quiet_NaN();
  }
  rep.unstable_by_K0 = rep.K0 < 0.0;
  return rep;
}

ProportionalInstabilityResult instability_example33(const ModelSpec& model, const Linearization& lin, double p,
                                      double proportionality_tol) {
  const KernelComponent& term = lin.single_term();
  if (!(p > 0.0)) throw DomainError("proportionality factor p must be > 0");
  const KernelTerm& kt = model.alpha.single_term();
  const auto& grid = lin.grid();
  const std::size_t n = grid.size();

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(p * term.attack_weight[i]));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(term.prey_weight[i] - p * term.attack_weight[i]) > proportionality_tol * std::max(scale, 1e-300)) {
      throw DomainError(fmt::format("c alpha1 != p alpha2 at s = {}", grid.node(i)));
    }
  }
  if (std::abs(kt.alpha2(0.0)) > proportionality_tol * std::max(scale / p, 1.0)) {
    throw DomainError("example requires alpha2(0) = 0");
  }

  const GridFunction gamma_env_s = grid_derivative(lin.gamma_env);
  ProportionalInstabilityResult out{false, GridFunction(lin.grid_ptr())};
  bool holds = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = grid.node(i);
    const double a2 = kt.alpha2(s);
    out.profile[i] = kt.alpha1(s) / p + kt.alpha2.derivative(s) * lin.gamma_env[i] +
                     a2 * (gamma_env_s[i] - lin.gamma_env[i] * lin.rho_star[i] / lin.gamma_star[i] + lin.mu_env[i]);
    const bool ok = a2 != 0.0 ? out.profile[i] < 0.0 : out.profile[i] <= 0.0;
    if (!ok) holds = false;
  }
  out.condition_holds = holds;
  return out;
}

double rtilde_prime(const ModelSpec& model, const SteadyState& state, double p, double proportionality_tol) {
  const KernelTerm& kt = model.alpha.single_term();
  const auto& g = model.gamma;
  if (!(g.feedback() == Feedback::none || g.feedback_coeff() == 0.0) || g.base().family() != Family::constant ||
      g.base().params()[0] != 1.0) {
    throw DomainError("rtilde_prime requires the age-structured case gamma == 1");
  }
  if (!(p > 0.0)) throw DomainError("proportionality factor p must be > 0");

  const auto& grid = state.grid();
  const std::size_t n = grid.size();
  GridFunction hazard(state.grid_ptr());
  GridFunction slope(state.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) {
    const double s = grid.node(i);
    const double a1 = kt.alpha1(s);
    const double a2 = kt.alpha2(s);
    const double ca1 = model.c(s) * a1;
    if (std::abs(ca1 - p * a2) > proportionality_tol * std::max(std::abs(p * a2), 1e-300) && a2 != 0.0) {
      throw DomainError(fmt::format("c alpha1 != p alpha2 at s = {}", s));
    }
    double ratio = 0.0;  // p^-1 alpha1 / alpha2
    if (a2 > 0.0) {
      ratio = a1 / (p * a2);
    } else if (i == 0 || i + 1 == n) {
      // alpha2 vanishes at the end points; the proportionality gives the limit 1/c.
      if (!(model.c(s) > 0.0)) throw DomainError("rtilde_prime requires c > 0 where alpha2 vanishes");
      ratio = 1.0 / model.c(s);
    } else {
      throw DomainError(fmt::format("rtilde_prime requires alpha2 > 0 at interior node s = {}", s));
    }
    hazard[i] = model.mu(s, state.E[i]) + state.E[i] * ratio;
    slope[i] = model.mu.d_env(state.E[i]) + ratio;
  }
  const GridFunction h_cum = cumulative_integral(hazard);
  const GridFunction s_cum = cumulative_integral(slope);
  GridFunction integrand(state.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) integrand[i] = model.beta(grid.node(i)) * std::exp(-h_cum[i]) * s_cum[i];
  return -integrate(integrand);
}

GridFunction resolvent_AB(const Linearization& lin, double lambda, const GridFunction& f) {
  require_domain(lin, lambda);
  const GridFunction x = pi_exponent(lin, lambda);
  GridFunction pi(lin.grid_ptr());
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = std::exp(-x[i]);
  const double L = weighted(lin.lambda_weight, pi) - 1.0;
  if (std::abs(L) < 1e-14) throw DomainError(fmt::format("lambda = {} is a pole of the resolvent (L = 0)", lambda));

  const GridFunction jf = discounted(lin, x, f);
  const double u0 = weighted(lin.lambda_weight, jf) / -L;
  GridFunction u(lin.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = u0 * pi[i] + jf[i];
  return u;
}

GridFunction reconstruct_eigenfunction(const ModelSpec& model, const Linearization& lin, double lambda) {
  const KernelComponent& term = lin.single_term();
  const CharacteristicSample cs = characteristic_K(model, lin, lambda);
  const Matrix3 m = characteristic_matrix(cs, term.g3);

  // Null vector: the largest cross product of two rows.
  std::array<double, 3> best{};
  double best_norm = -1.0;
  for (auto [r1, r2] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    const auto v = cross(m[static_cast<std::size_t>(r1)], m[static_cast<std::size_t>(r2)]);
    const double norm = std::hypot(v[0], v[1], v[2]);
    if (norm > best_norm) {
      best = v;
      best_norm = norm;
    }
  }
  if (!(best_norm > 0.0)) throw DomainError("characteristic matrix has a null space of dimension > 1");

  const GridFunction x = pi_exponent(lin, lambda);
  const GridFunction j1 = discounted(lin, x, term.g1);
  const GridFunction j2 = discounted(lin, x, term.g2);
  GridFunction u(lin.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = best[0] * std::exp(-x[i]) - best[1] * j1[i] - best[2] * j2[i];

  double norm = l1_norm(u);
  if (!(norm > 0.0)) throw DomainError("reconstructed eigenfunction vanishes");
  if (integrate(u) < 0.0) norm = -norm;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] /= norm;
  return u;
}

}  // namespace canndyn
