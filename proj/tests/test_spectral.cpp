// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "canndyn/error.hpp"
#include "canndyn/spectral.hpp"
#include "models.hpp"

using namespace canndyn;

namespace {

// Constant birth b against constant death mu; the empty state's only real root is b - mu.
ModelSpec birth_death(double b, double mu) {
  ModelSpec m;
  m.beta = Rate1D::constant(b);
  m.mu = Rate2D::constant(mu);
  m.gamma = Rate2D::constant(1.0);
  m.alpha = AttackKernel::separable(Rate1D::constant(0.2), Rate1D::constant(0.1));
  m.c = Rate1D::constant(0.5);
  m.s_max = 40.0;
  return m;
}

Linearization proportional_lin(std::size_t cells) {
  const fixtures::Proportional p{.b0 = 12.0};
  SteadyOptions o;
  o.n0_lo = 0.01;
  o.n0_hi = 5.0;
  o.fp_tol = 1e-11;
  return build_linearization(p.model(), solve_steady(p.model(), build_grid(p.s_max, cells), o));
}

}  // namespace

TEST_CASE("survival factor in closed form") {
  const ModelSpec m = birth_death(2.0, 0.5);
  const auto g = build_grid(m.s_max, 400);
  const auto lin = build_linearization(m, trivial_steady(m, g));
  for (double lambda : {-0.3, 0.0, 1.2}) {
    const auto pi = pi_eval(lin, lambda);
    for (std::size_t i = 0; i < g->size(); i += 50) {
      CHECK(pi[i] == doctest::Approx(std::exp(-(0.5 + lambda) * g->node(i))).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(pi_eval(lin, -0.5), DomainError);
  CHECK_THROWS_AS(pi_eval(lin, -0.7), DomainError);
}

TEST_CASE("discounted integral against direct quadrature") {
  const fixtures::Proportional p{.b0 = 12.0};
  const ModelSpec m = p.model();
  SteadyOptions o;
  o.n0_lo = 0.01;
  o.n0_hi = 5.0;
  const auto lin = build_linearization(m, solve_steady(m, build_grid(p.s_max, 4000), o));
  const auto& g = lin.grid_ptr();
  const auto f = GridFunction::sample(g, [](double s) { return s * std::exp(-0.5 * s); });
  const double lambda = 0.4;
  const auto pi = pi_eval(lin, lambda);
  GridFunction integrand(g);
  for (std::size_t i = 0; i < g->size(); ++i) integrand[i] = f[i] / (lin.gamma_star[i] * pi[i]);
  const auto inner = cumulative_integral(integrand);
  const auto J = discounted_integral(lin, lambda, f);
  for (std::size_t i = 0; i < g->size(); i += 400) {
    CHECK(J[i] == doctest::Approx(pi[i] * inner[i]).epsilon(1e-5).scale(1e-12));
  }
}

TEST_CASE("characteristic functions of the empty state") {
  const ModelSpec m = birth_death(2.0, 0.5);
  const auto g = build_grid(m.s_max, 800);
  const auto lin = build_linearization(m, trivial_steady(m, g));
  // L(lambda) = b (1 - e^{-(mu + lambda) S}) / (mu + lambda) - 1.
  for (double lambda : {0.0, 1.0, 3.0}) {
    const double r = 0.5 + lambda;
    const double exact = 2.0 * (1.0 - std::exp(-r * 40.0)) / r;
    // Trapezoid error (h r)^2 / 12 relative.
    CHECK(characteristic_L(lin, lambda) + 1.0 == doctest::Approx(exact).epsilon(1e-3));
    // Without a kernel the determinant reduces to -L.
    CHECK(characteristic_K(m, lin, lambda).K == doctest::Approx(-characteristic_L(lin, lambda)).epsilon(1e-12));
  }
  const auto roots = scan_real_roots_K(m, lin, default_lambda_lo(lin), 5.0, 200, 1e-12);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0].value == doctest::Approx(1.5).epsilon(1e-3));
  const auto lroots = scan_real_roots_L(lin, default_lambda_lo(lin), 5.0, 200, 1e-12);
  REQUIRE(lroots.size() == 1);
  CHECK(lroots[0].value == doctest::Approx(roots[0].value).epsilon(1e-8));
}

TEST_CASE("L'(0) matches a central difference") {
  const auto lin = proportional_lin(1200);
  const double h = 1e-5;
  const double fd = (characteristic_L(lin, h) - characteristic_L(lin, -h)) / (2 * h);
  CHECK(characteristic_L_prime0(lin) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("proportional model: rightmost real root") {
  // An independent ODE-based evaluation of the determinant puts the root at 0.053119.
  const ModelSpec m = fixtures::Proportional{.b0 = 12.0}.model();
  const auto lin = proportional_lin(4000);
  SpectralOptions opt;
  opt.lambda_lo = 0.0;
  opt.lambda_hi = 2.0;
  const auto rep = spectral_report(m, lin, opt);
  REQUIRE_FALSE(rep.real_roots_K.empty());
  CHECK(rep.real_roots_K.back().value == doctest::Approx(0.053119).epsilon(2e-4 / 0.053119));
  CHECK(rep.K0 < 0.0);
  CHECK(rep.unstable_by_K0);
  CHECK(rep.samples.size() == 200);
  CHECK(rep.samples.front().lambda == 0.0);
  CHECK(rep.samples.back().lambda == 2.0);
}

TEST_CASE("eigenfunction satisfies the eigenvalue problem") {
  const ModelSpec m = fixtures::Proportional{.b0 = 12.0}.model();
  const auto lin = proportional_lin(4000);
  const auto roots = scan_real_roots_K(m, lin, 0.0, 2.0, 200, 1e-12);
  REQUIRE_FALSE(roots.empty());
  const double lambda = roots.back().value;
  const auto u = reconstruct_eigenfunction(m, lin, lambda);
  CHECK(l1_norm(u) == doctest::Approx(1.0));
  CHECK(integrate(u) >= 0.0);
  GridFunction flux(lin.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) flux[i] = lin.gamma_star[i] * u[i];
  const auto dflux = grid_derivative(flux);
  const auto cu = lin.apply_c(u);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    worst = std::max(worst, std::abs(lambda * u[i] + dflux[i] + lin.sink[i] * u[i] - cu[i]));
  }
  CHECK(worst / u.sup_norm() < 1e-3);
  GridFunction bw(lin.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) bw[i] = lin.lambda_weight[i] * u[i];
  CHECK(u[0] == doctest::Approx(integrate(bw)).epsilon(1e-6));
}

TEST_CASE("proportional-attack diagnostics check their preconditions") {
  const ModelSpec m = fixtures::Proportional{.b0 = 12.0}.model();
  const auto lin = proportional_lin(400);
  // c alpha1 = 1 * alpha2 here, so p = 2 is not a valid factor.
  CHECK_THROWS_AS(instability_example33(m, lin, 2.0), DomainError);
  CHECK_THROWS_AS(rtilde_prime(m, lin.state, 2.0), DomainError);
  CHECK_NOTHROW(instability_example33(m, lin, 1.0));
  CHECK(std::isfinite(rtilde_prime(m, lin.state, 1.0)));

  ModelSpec bent = m;
  bent.gamma = Rate2D(Rate1D::constant(1.0), Feedback::linear, 0.01);
  CHECK_THROWS_AS(rtilde_prime(bent, lin.state, 1.0), DomainError);
}

TEST_CASE("resolvent of the renewal part") {
  const ModelSpec m = birth_death(2.0, 0.5);
  const auto g = build_grid(m.s_max, 4000);
  const auto lin = build_linearization(m, trivial_steady(m, g));
  const auto f = GridFunction::sample(g, [](double s) { return std::exp(-s); });
  const double lambda = 3.0;
  const auto u = resolvent_AB(lin, lambda, f);
  const auto du = grid_derivative(u);
  for (std::size_t i = 10; i + 10 < g->size(); i += 397) {
    CHECK(lambda * u[i] + du[i] + 0.5 * u[i] == doctest::Approx(f[i]).epsilon(1e-3));
  }
  GridFunction bw(g);
  for (std::size_t i = 0; i < g->size(); ++i) bw[i] = 2.0 * u[i];
  CHECK(u[0] == doctest::Approx(integrate(bw)).epsilon(1e-8));
  // L(1.5) = 0 up to the tail.
  const auto lroots = scan_real_roots_L(lin, 1.0, 2.0, 20, 1e-14);
  REQUIRE(lroots.size() == 1);
  CHECK_THROWS_AS(resolvent_AB(lin, lroots[0].value, f), DomainError);
}
