// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace canndyn {

/// Parametric families for size-dependent rates. Every family is bounded on
/// [0, inf) and has a closed-form derivative.
///
///   constant         p0
///   exp_decay        p0 exp(-p1 s)                 p1 >= 0
///   poly_exp         p0 s^p1 exp(-p2 s)            p1 == 0 or p1 >= 1, p2 > 0
///   saturating_ramp  p0 + p1 (1 - exp(-p2 s))      p2 >= 0
enum class Family { constant, exp_decay, poly_exp, saturating_ramp };

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

class Rate1D {
 public:
  Rate1D() = default;
  /// Throws ModelError on wrong parameter count, non-finite values or a
  /// parameter outside the family's admissible range.
  Rate1D(Family family, std::vector<double> params);

  static Rate1D constant(double value) { return {Family::constant, {value}}; }

  double operator()(double s) const;
  double derivative(double s) const;

  /// Fraction of the integral over [0, inf) that lies beyond s_max. Families
  /// that are not integrable on the half line (nonzero asymptote) report 0;
  /// the identically zero rate reports 0.
  double tail_fraction(double s_max) const;

  Family family() const { return family_; }
  const std::vector<double>& params() const { return params_; }

  friend bool operator==(const Rate1D&, const Rate1D&) = default;

 private:
  Family family_ = Family::constant;
  std::vector<double> params_{0.0};
};

enum class Feedback { none, linear, saturating };

std::string_view to_string(Feedback f);
Feedback parse_feedback(std::string_view name);

/// value(s, E) = base(s) + coeff * f(E), f(E) = E (linear) or E / (1 + E)
/// (saturating).
class Rate2D {
 public:
  Rate2D() = default;
  Rate2D(Rate1D base, Feedback feedback, double feedback_coeff);

  static Rate2D constant(double value) { return {Rate1D::constant(value), Feedback::none, 0.0}; }

  double operator()(double s, double e) const;
  /// coeff * f(E), the environment-dependent part of the value.
  double env_part(double e) const;
  /// Partial derivative in the environment argument.
  double d_env(double e) const;
  /// Partial derivative in the size argument.
  double d_size(double s) const { return base_.derivative(s); }

  const Rate1D& base() const { return base_; }
  Feedback feedback() const { return feedback_; }
  double feedback_coeff() const { return coeff_; }

  friend bool operator==(const Rate2D&, const Rate2D&) = default;

 private:
  Rate1D base_;
  Feedback feedback_ = Feedback::none;
  double coeff_ = 0.0;
};

struct KernelTerm {
  Rate1D alpha1;  // dependence on the victim's size
  Rate1D alpha2;  // dependence on the attacker's size

  friend bool operator==(const KernelTerm&, const KernelTerm&) = default;
};

/// alpha(y, s) = sum_i alpha1_i(y) alpha2_i(s): the rate at which size-s
/// individuals attack size-y individuals.
class AttackKernel {
 public:
  AttackKernel() = default;
  explicit AttackKernel(std::vector<KernelTerm> terms) : terms_(std::move(terms)) {}

  static AttackKernel separable(Rate1D alpha1, Rate1D alpha2) {
    return AttackKernel({KernelTerm{std::move(alpha1), std::move(alpha2)}});
  }

  double operator()(double y, double s) const;
  /// D_2 alpha(y, s), the derivative in the second (attacker size) argument.
  double d_second(double y, double s) const;

  const std::vector<KernelTerm>& terms() const { return terms_; }
  bool strictly_separable() const { return terms_.size() == 1; }
  /// Throws DomainError unless the kernel has exactly one term.
  const KernelTerm& single_term() const;

  friend bool operator==(const AttackKernel&, const AttackKernel&) = default;

 private:
  std::vector<KernelTerm> terms_;
};

struct ModelSpec {
  Rate1D beta;
  Rate2D mu;
  Rate2D gamma;
  AttackKernel alpha;
  Rate1D c;
  double gamma0 = 1.0;
  double s_max = 1.0;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Throws ModelError unless gamma0 > 0 and s_max > 0 (both finite).
void check_model_scalars(const ModelSpec& model);

enum class Ingredient { beta, mu, gamma, alpha, c, alpha1, alpha2 };
enum class Derivative { value, dE, d2_second_arg };

Ingredient parse_ingredient(std::string_view name);
std::string_view to_string(Ingredient which);

/// Evaluates an ingredient or one of its closed-form partials.
///
/// `second` is the environment value E for mu and gamma, and the second size
/// argument for alpha (alpha(s, second)). For alpha1/alpha2, `term` selects the
/// separable term. `d2_second_arg` means D_2 alpha for alpha and the plain
/// derivative for one-argument rates; `dE` is only defined for mu and gamma.
double evaluate(const ModelSpec& model, Ingredient which, double s,
                std::optional<double> second = std::nullopt,
                Derivative derivative = Derivative::value, std::size_t term = 0);

struct Violation {
  std::string ingredient;
  double s = 0.0;
  std::optional<double> second;  // E, or the second size argument of alpha
  double value = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  double min_gamma = 0.0;
  double tail_mass = 0.0;
  double tail_tolerance = 0.0;
};

/// Samples the sign and lower-bound assumptions on an n_samples grid over
/// [0, s_max] x [E_lo, E_hi]. Violations are reported, never thrown.
ValidationReport validate_model(const ModelSpec& model, double e_lo, double e_hi, int n_samples,
                                double tail_tolerance = 1e-3);

}  // namespace canndyn
