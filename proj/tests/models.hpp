// SPDX-License-Identifier: Apache-2.0
// Model builders shared by the unit and acceptance tests.
#pragma once

#include <random>

#include "canndyn/ingredients.hpp"

namespace canndyn::fixtures {

inline Rate2D plain(Rate1D base) { return Rate2D(std::move(base), Feedback::none, 0.0); }

/// gamma == 1, beta == 0, alpha == 0, mu == mu0: exact solution n(s, t) = n_in(s - t) exp(-mu0 t).
inline ModelSpec transport_decay(double mu0, double s_max) {
  ModelSpec m;
  m.beta = Rate1D::constant(0.0);
  m.mu = Rate2D::constant(mu0);
  m.gamma = Rate2D::constant(1.0);
  m.alpha = AttackKernel::separable(Rate1D::constant(0.0), Rate1D::constant(0.0));
  m.c = Rate1D::constant(0.0);
  m.gamma0 = 1.0;
  m.s_max = s_max;
  return m;
}

/// Constant attack rate a, constant mu, gamma == 1, beta = b0 exp(-b s).
/// Then M = a P with P the total population, and R = b0 / (b + mu + a P),
/// so the equilibrium has P = (b0 - b - mu) / a and n*(0) = P (mu + a P).
struct ConstantAlpha {
  double b0 = 0.5;
  double b = 0.1;
  double mu = 0.1;
  double a = 0.5;
  double c = 0.2;

  ModelSpec model(double s_max) const {
    ModelSpec m;
    m.beta = Rate1D(Family::exp_decay, {b0, b});
    m.mu = Rate2D::constant(mu);
    m.gamma = Rate2D::constant(1.0);
    m.alpha = AttackKernel::separable(Rate1D::constant(a), Rate1D::constant(1.0));
    m.c = Rate1D::constant(c);
    m.gamma0 = 1.0;
    m.s_max = s_max;
    return m;
  }
  double total() const { return (b0 - b - mu) / a; }
  double boundary() const { return total() * (mu + a * total()); }
};

/// Proportional-attack model: gamma == 1, c == c0, alpha2 = A s exp(-k s),
/// c alpha1 = p alpha2, mu = mu_b - m E / (1 + E), beta = b0 s^2 exp(-s / 2) / 8.
/// For this family the pointwise instability profile is
/// alpha2 (1/c0 - m / (1 + E*)^2), so it is negative wherever alpha2 > 0
/// once m c0 > (1 + max E*)^2.
struct Proportional {
  double A = 1.0;
  double k = 1.0;
  double p = 1.0;
  double c0 = 10.0;
  double mu_b = 1.0;
  double m = 1.0;
  double b0 = 1.0;
  double s_max = 40.0;

  ModelSpec model() const {
    ModelSpec md;
    md.beta = Rate1D(Family::poly_exp, {b0 / 8.0, 2.0, 0.5});
    md.mu = Rate2D(Rate1D::constant(mu_b), Feedback::saturating, -m);
    md.gamma = Rate2D::constant(1.0);
    md.alpha = AttackKernel::separable(Rate1D(Family::poly_exp, {A * p / c0, 1.0, k}), Rate1D(Family::poly_exp, {A, 1.0, k}));
    md.c = Rate1D::constant(c0);
    md.gamma0 = 1.0;
    md.s_max = s_max;
    return md;
  }
};

/// Randomized well-posed ingredients with E-dependent rates.
inline ModelSpec random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  ModelSpec m;
  // beta(0) = 0 with a gradual onset: beta'(0) <= 0.5.
  m.beta = Rate1D(Family::saturating_ramp, {0.0, in(0.2, 1.0), in(0.1, 0.5)});
  m.mu = Rate2D(Rate1D(Family::saturating_ramp, {in(0.3, 1.0), in(0.0, 0.5), in(0.1, 1.0)}), Feedback::saturating,
                in(0.0, 0.5));
  m.gamma = Rate2D(Rate1D(Family::saturating_ramp, {in(1.0, 2.0), in(0.0, 1.0), in(0.1, 1.0)}), Feedback::linear, in(-0.05, 0.0));
  m.alpha = AttackKernel::separable(Rate1D(Family::exp_decay, {in(0.1, 1.0), in(0.0, 1.0)}),
                                    Rate1D(Family::poly_exp, {in(0.1, 1.0), 1.0, in(0.5, 2.0)}));
  m.c = Rate1D(Family::saturating_ramp, {in(0.1, 0.5), in(0.0, 0.5), in(0.1, 1.0)});
  m.gamma0 = 0.5;
  m.s_max = 30.0;
  return m;
}

}  // namespace canndyn::fixtures
