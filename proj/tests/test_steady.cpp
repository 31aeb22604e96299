// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "canndyn/error.hpp"
#include "canndyn/steady.hpp"
#include "models.hpp"

using namespace canndyn;

namespace {

SteadyOptions bracket(double lo, double hi) {
  SteadyOptions o;
  o.n0_lo = lo;
  o.n0_hi = hi;
  return o;
}

// Size-dependent kernel and E-dependent rates; has a positive equilibrium.
ModelSpec feedback_model() {
  ModelSpec m;
  m.beta = Rate1D(Family::saturating_ramp, {0.0, 1.2, 0.5});
  m.mu = Rate2D(Rate1D::constant(0.2), Feedback::linear, 0.05);
  m.gamma = Rate2D(Rate1D(Family::saturating_ramp, {1.0, 0.5, 0.3}), Feedback::saturating, -0.2);
  m.alpha = AttackKernel::separable(Rate1D(Family::exp_decay, {0.5, 0.1}), Rate1D(Family::exp_decay, {1.0, 0.2}));
  m.c = Rate1D::constant(0.3);
  m.gamma0 = 0.5;
  m.s_max = 60.0;
  return m;
}

}  // namespace

TEST_CASE("feedbacks agree with the double sum over the kernel") {
  ModelSpec m = feedback_model();
  m.alpha = AttackKernel({{Rate1D(Family::exp_decay, {0.5, 0.1}), Rate1D(Family::exp_decay, {1.0, 0.2})},
                          {Rate1D::constant(0.2), Rate1D(Family::poly_exp, {1.0, 1.0, 0.5})}});
  m.c = Rate1D(Family::saturating_ramp, {0.1, 0.3, 0.2});
  const auto g = build_grid(20.0, 120);
  const auto n = GridFunction::sample(g, [](double s) { return std::exp(-0.3 * s) * (1.0 + std::sin(s)); });
  const auto fb = feedbacks_from_density(m, n);
  const auto w = g->weights();
  for (std::size_t j = 0; j < g->size(); j += 7) {
    double E = 0.0, M = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      E += w[i] * m.c(g->node(i)) * m.alpha(g->node(i), g->node(j)) * n[i];
      M += w[i] * m.alpha(g->node(j), g->node(i)) * n[i];
    }
    CHECK(fb.E[j] == doctest::Approx(E).epsilon(1e-13));
    CHECK(fb.M[j] == doctest::Approx(M).epsilon(1e-13));
  }
}

TEST_CASE("net reproduction of the empty population") {
  const fixtures::ConstantAlpha bench;
  const ModelSpec m = bench.model(60.0);
  const auto g = build_grid(m.s_max, 3000);
  const GridFunction zero(g);
  // int_0^S 0.5 e^{-0.2 s} ds
  const double exact = 0.5 / 0.2 * (1.0 - std::exp(-0.2 * 60.0));
  CHECK(net_reproduction(m, zero, zero) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("constant attack benchmark reproduces the scalar equilibrium") {
  const fixtures::ConstantAlpha bench;
  const ModelSpec m = bench.model(60.0);
  const auto g = build_grid(m.s_max, 3000);
  const SteadyState st = solve_steady(m, g, bracket(0.01, 2.0));
  CHECK(st.residual_R < 1e-6);
  CHECK(st.n0 == doctest::Approx(bench.boundary()).epsilon(1e-4));
  CHECK(integrate(st.n) == doctest::Approx(bench.total()).epsilon(1e-4));
  // M is the constant a P.
  CHECK(st.M[0] == doctest::Approx(bench.a * bench.total()).epsilon(1e-4));
  CHECK(st.M[3000] == doctest::Approx(st.M[0]).epsilon(1e-12));
  CHECK_FALSE(st.is_trivial());
}

TEST_CASE("solved equilibria are self-consistent") {
  const ModelSpec m = feedback_model();
  const auto g = build_grid(m.s_max, 600);
  SteadyOptions o = bracket(1e-3, 5.0);
  o.fp_tol = 1e-9;
  const SteadyState st = solve_steady(m, g, o);
  const auto fb = feedbacks_from_density(m, st.n);
  double dE = 0.0, dM = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    dE = std::max(dE, std::abs(fb.E[i] - st.E[i]));
    dM = std::max(dM, std::abs(fb.M[i] - st.M[i]));
  }
  CHECK(dE <= o.fp_tol);
  CHECK(dM <= o.fp_tol);
  CHECK(std::abs(net_reproduction(m, st.E, st.M) - 1.0) <= o.fp_tol);
  CHECK(st.residual_R <= o.fp_tol);
  CHECK(st.n.min() > 0.0);
  // The profile rebuilt from (E, M) is the stored density.
  const auto again = profile_from_feedbacks(m, st.n0, st.E, st.M);
  for (std::size_t i = 0; i < g->size(); i += 50) CHECK(again[i] == doctest::Approx(st.n[i]).epsilon(1e-14));
}

TEST_CASE("trivial bracket and trivial state") {
  const fixtures::ConstantAlpha bench;
  const ModelSpec m = bench.model(30.0);
  const auto g = build_grid(m.s_max, 300);
  const SteadyState st = solve_steady(m, g, bracket(0.0, 0.0));
  CHECK(st.is_trivial());
  const GridFunction zero(g);
  CHECK(st.residual_R == doctest::Approx(std::abs(net_reproduction(m, zero, zero) - 1.0)));
}

TEST_CASE("without interaction R does not depend on n0") {
  ModelSpec m = feedback_model();
  m.alpha = AttackKernel::separable(Rate1D::constant(0.0), Rate1D::constant(0.0));
  m.mu = Rate2D::constant(0.4);
  m.gamma = Rate2D::constant(1.0);
  const auto g = build_grid(m.s_max, 400);
  const auto lo = steady_for_boundary(m, g, 0.1, 1e-12, 0.5, 100);
  const auto hi = steady_for_boundary(m, g, 10.0, 1e-12, 0.5, 100);
  CHECK(std::abs(net_reproduction(m, lo.E, lo.M) - net_reproduction(m, hi.E, hi.M)) < 1e-12);
  CHECK_THROWS_AS(solve_steady(m, g, bracket(0.1, 10.0)), ConvergenceError);
}

TEST_CASE("steady solver argument and convergence errors") {
  const fixtures::ConstantAlpha bench;
  const ModelSpec m = bench.model(30.0);
  const auto g = build_grid(m.s_max, 200);
  CHECK_THROWS_AS(solve_steady(m, g, bracket(2.0, 1.0)), DomainError);
  CHECK_THROWS_AS(solve_steady(m, g, bracket(-1.0, 1.0)), DomainError);
  // The equilibrium n0 = 0.24 lies outside [1, 2].
  CHECK_THROWS_AS(solve_steady(m, g, bracket(1.0, 2.0)), ConvergenceError);
  SteadyOptions o = bracket(0.01, 2.0);
  o.max_iter = 1;
  CHECK_THROWS_AS(solve_steady(m, g, o), ConvergenceError);
  CHECK_THROWS_AS(steady_for_boundary(m, g, 0.5, 1e-10, 0.0, 10), DomainError);
}

TEST_CASE("growth below gamma0 is a model error") {
  ModelSpec m = feedback_model();
  m.gamma = Rate2D(Rate1D::constant(1.0), Feedback::linear, -1.0);
  m.gamma0 = 0.5;
  const auto g = build_grid(m.s_max, 100);
  const GridFunction E(g, std::vector<double>(101, 0.9));
  CHECK_THROWS_AS(net_reproduction(m, E, GridFunction(g)), ModelError);
}
