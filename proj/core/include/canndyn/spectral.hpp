// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "canndyn/grid.hpp"
#include "canndyn/ingredients.hpp"
#include "canndyn/linearization.hpp"

namespace canndyn {

/// pi(s, lambda) = exp(-int_0^s (rho* + lambda) / gamma* dy), evaluated in the
/// equivalent form gamma*(0)/gamma*(s) exp(-int_0^s (mu* + M* + lambda)/gamma*).
/// Throws DomainError unless lambda > -mu0.
GridFunction pi_eval(const Linearization& lin, double lambda);

/// J(s) = pi(s, lambda) int_0^s g(r) / (gamma*(r) pi(r, lambda)) dr, accumulated
/// with exponent differences so that neither factor is formed on its own.
GridFunction discounted_integral(const Linearization& lin, double lambda, const GridFunction& g);

struct CharacteristicSample {
  double lambda = 0.0;
  double K = 0.0;
  std::array<double, 9> a{};  // a1 ... a9
  double L = 0.0;
};

/// The nine coefficients and the 3x3 characteristic determinant
///   K = det [[a1, 1 + a2, a3], [a4, a5, 1 + a6], [1 + a7, g3 + a8, a9]].
/// Requires a strictly separable kernel.
CharacteristicSample characteristic_K(const ModelSpec& model, const Linearization& lin, double lambda);

/// L(lambda) = int lambda_weight pi(., lambda) - 1, the characteristic function
/// of the boundary-renewal part A + B.
double characteristic_L(const Linearization& lin, double lambda);
/// L'(0) = -int lambda_weight pi(s, 0) tau(s) ds with tau(s) = int_0^s 1/gamma*.
double characteristic_L_prime0(const Linearization& lin);

struct Root {
  double value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double residual = 0.0;  // |K(value)| or |L(value)|
};

struct SpectralOptions {
  std::optional<double> lambda_lo;  // default -mu0 + 1e-3 mu0
  std::optional<double> lambda_hi;  // default 10 max(rho*) / min(gamma*)
  int n_scan = 200;
  double root_tol = 1e-10;
};

struct SpectralReport {
  std::vector<CharacteristicSample> samples;
  std::vector<Root> real_roots_K;
  std::vector<Root> L_roots;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double K0 = 0.0;
  bool unstable_by_K0 = false;
  double Lprime0 = 0.0;
  double mu0 = 0.0;
  /// Complex roots are not searched for.
  static constexpr const char* scan_note = "real-axis scan only";
};

double default_lambda_lo(const Linearization& lin);
double default_lambda_hi(const Linearization& lin);

/// Samples K on n_scan points of [lo, hi] and bisects every sign change to
/// |K| < root_tol. Roots ascend.
std::vector<Root> scan_real_roots_K(const ModelSpec& model, const Linearization& lin, double lo, double hi,
                                    int n_scan, double root_tol);
std::vector<Root> scan_real_roots_L(const Linearization& lin, double lo, double hi, int n_scan, double root_tol);

/// Full real-axis report: K and L samples, their roots, K(0) and L'(0).
SpectralReport spectral_report(const ModelSpec& model, const Linearization& lin, const SpectralOptions& options);

struct ProportionalInstabilityResult {
  bool condition_holds = false;
  GridFunction profile;
};

/// Pointwise instability profile for the proportional-attack case
/// c alpha1 = p alpha2 with alpha2(0) = 0:
///   p^-1 a1 + a2' gamma_E + a2 [ (gamma_E)_s - gamma_E rho* / gamma* + mu_E ].
/// The condition holds when the profile is < 0 wherever alpha2 > 0 and <= 0
/// where alpha2 vanishes. Throws DomainError if the preconditions fail.
ProportionalInstabilityResult instability_example33(const ModelSpec& model, const Linearization& lin, double p,
                                      double proportionality_tol = 1e-9);

/// Formal derivative of the age-structured net reproduction in E at E*.
/// Requires gamma == 1 without E-dependence, c alpha1 = p alpha2, and alpha2 > 0
/// at interior nodes.
double rtilde_prime(const ModelSpec& model, const SteadyState& state, double p,
                    double proportionality_tol = 1e-9);

/// Solution of (lambda - (A + B)) u = f. Throws DomainError at a pole
/// (L(lambda) = 0) or outside lambda > -mu0.
GridFunction resolvent_AB(const Linearization& lin, double lambda, const GridFunction& f);

/// Eigenfunction for a root of K: u = u(0) pi - ubar1 J[g1] - ubar2 J[g2] with
/// (u(0), ubar1, ubar2) spanning the null space of the characteristic matrix.
/// Normalized to unit L1 norm with a nonnegative integral.
GridFunction reconstruct_eigenfunction(const ModelSpec& model, const Linearization& lin, double lambda);

}  // namespace canndyn
