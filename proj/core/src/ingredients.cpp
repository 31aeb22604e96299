// SPDX-License-Identifier: Apache-2.0
#include "canndyn/ingredients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "canndyn/error.hpp"

namespace canndyn {

namespace {

std::size_t param_count(Family f) {
  switch (f) {
    case Family::constant: return 1;
    case Family::exp_decay: return 2;
    case Family::poly_exp: return 3;
    case Family::saturating_ramp: return 3;
  }
  return 0;
}

double feedback_value(Feedback fb, double e) {
  switch (fb) {
    case Feedback::none: return 0.0;
    case Feedback::linear: return e;
    case Feedback::saturating: return e / (1.0 + e);
  }
  return 0.0;
}

double feedback_slope(Feedback fb, double e) {
  switch (fb) {
    case Feedback::none: return 0.0;
    case Feedback::linear: return 1.0;
    case Feedback::saturating: return 1.0 / ((1.0 + e) * (1.0 + e));
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::constant: return "constant";
    case Family::exp_decay: return "exp_decay";
    case Family::poly_exp: return "poly_exp";
    case Family::saturating_ramp: return "saturating_ramp";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (auto f : {Family::constant, Family::exp_decay, Family::poly_exp, Family::saturating_ramp}) {
    if (to_string(f) == name) return f;
  }
  throw ModelError(fmt::format("unknown rate family '{}'", name));
}

std::string_view to_string(Feedback f) {
  switch (f) {
    case Feedback::none: return "none";
    case Feedback::linear: return "linear";
    case Feedback::saturating: return "saturating";
  }
  return "?";
}

Feedback parse_feedback(std::string_view name) {
  for (auto f : {Feedback::none, Feedback::linear, Feedback::saturating}) {
    if (to_string(f) == name) return f;
  }
  throw ModelError(fmt::format("unknown feedback '{}'", name));
}

Rate1D::Rate1D(Family family, std::vector<double> params) : family_(family), params_(std::move(params)) {
  if (params_.size() != param_count(family_)) {
    throw ModelError(fmt::format("family {} takes {} parameters, got {}", to_string(family_),
                                 param_count(family_), params_.size()));
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw ModelError("non-finite rate parameter");
  }
  switch (family_) {
    case Family::constant: break;
    case Family::exp_decay:
      if (params_[1] < 0.0) throw ModelError("exp_decay requires p1 >= 0");
      break;
    case Family::poly_exp:
      // p1 in (0, 1) would make the derivative unbounded at s = 0.
      if (!(params_[1] == 0.0 || params_[1] >= 1.0)) throw ModelError("poly_exp requires p1 == 0 or p1 >= 1");
      if (params_[2] <= 0.0) throw ModelError("poly_exp requires p2 > 0");
      break;
    case Family::saturating_ramp:
      if (params_[2] < 0.0) throw ModelError("saturating_ramp requires p2 >= 0");
      break;
  }
}

double Rate1D::operator()(double s) const {
  const auto& p = params_;
  switch (family_) {
    case Family::constant: return p[0];
    case Family::exp_decay: return p[0] * std::exp(-p[1] * s);
    case Family::poly_exp: {
      const double power = p[1] == 0.0 ? 1.0 : std::pow(s, p[1]);
      return p[0] * power * std::exp(-p[2] * s);
    }
    case Family::saturating_ramp: return p[0] + p[1] * (1.0 - std::exp(-p[2] * s));
  }
  return 0.0;
}

double Rate1D::derivative(double s) const {
  const auto& p = params_;
  switch (family_) {
    case Family::constant: return 0.0;
    case Family::exp_decay: return -p[1] * p[0] * std::exp(-p[1] * s);
    case Family::poly_exp: {
      const double k = p[1];
      const double decay = std::exp(-p[2] * s);
      if (k == 0.0) return -p[2] * p[0] * decay;
      const double lower = k == 1.0 ? 1.0 : std::pow(s, k - 1.0);
      return p[0] * decay * (k * lower - p[2] * std::pow(s, k));
    }
    case Family::saturating_ramp: return p[1] * p[2] * std::exp(-p[2] * s);
  }
  return 0.0;
}

double Rate1D::tail_fraction(double s_max) const {
  const auto& p = params_;
  if (p[0] == 0.0 && family_ != Family::saturating_ramp) return 0.0;
  switch (family_) {
    case Family::constant: return 0.0;
    case Family::exp_decay: return p[1] > 0.0 ? std::exp(-p[1] * s_max) : 0.0;
    case Family::poly_exp: return boost::math::gamma_q(p[1] + 1.0, p[2] * s_max);
    case Family::saturating_ramp:
      // Integrable only when the asymptote p0 + p1 vanishes, leaving -p1 exp(-p2 s).
      if (p[0] + p[1] == 0.0 && p[1] != 0.0 && p[2] > 0.0) return std::exp(-p[2] * s_max);
      return 0.0;
  }
  return 0.0;
}

Rate2D::Rate2D(Rate1D base, Feedback feedback, double feedback_coeff)
    : base_(std::move(base)), feedback_(feedback), coeff_(feedback_coeff) {
  if (!std::isfinite(coeff_)) throw ModelError("non-finite feedback_coeff");
}

double Rate2D::operator()(double s, double e) const { return base_(s) + env_part(e); }

double Rate2D::env_part(double e) const { return coeff_ * feedback_value(feedback_, e); }

double Rate2D::d_env(double e) const { return coeff_ * feedback_slope(feedback_, e); }

double AttackKernel::operator()(double y, double s) const {
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.alpha1(y) * t.alpha2(s);
  return sum;
}

double AttackKernel::d_second(double y, double s) const {
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.alpha1(y) * t.alpha2.derivative(s);
  return sum;
}

const KernelTerm& AttackKernel::single_term() const {
  if (!strictly_separable()) {
    throw DomainError(fmt::format("operation requires a strictly separable attack kernel (1 term), got {} terms",
                                  terms_.size()));
  }
  return terms_.front();
}

void check_model_scalars(const ModelSpec& model) {
  if (!std::isfinite(model.gamma0) || model.gamma0 <= 0.0) throw ModelError("gamma0 must be finite and > 0");
  if (!std::isfinite(model.s_max) || model.s_max <= 0.0) throw ModelError("s_max must be finite and > 0");
}

Ingredient parse_ingredient(std::string_view name) {
  for (auto w : {Ingredient::beta, Ingredient::mu, Ingredient::gamma, Ingredient::alpha, Ingredient::c,
                 Ingredient::alpha1, Ingredient::alpha2}) {
    if (to_string(w) == name) return w;
  }
  throw DomainError(fmt::format("unknown ingredient '{}'", name));
}

std::string_view to_string(Ingredient which) {
  switch (which) {
    case Ingredient::beta: return "beta";
    case Ingredient::mu: return "mu";
    case Ingredient::gamma: return "gamma";
    case Ingredient::alpha: return "alpha";
    case Ingredient::c: return "c";
    case Ingredient::alpha1: return "alpha1";
    case Ingredient::alpha2: return "alpha2";
  }
  return "?";
}

double evaluate(const ModelSpec& model, Ingredient which, double s, std::optional<double> second,
                Derivative derivative, std::size_t term) {
  if (!(s >= 0.0)) throw DomainError("evaluate requires s >= 0");

  auto one_arg = [&](const Rate1D& r) {
    switch (derivative) {
      case Derivative::value: return r(s);
      case Derivative::d2_second_arg: return r.derivative(s);
      case Derivative::dE: break;
    }
    throw DomainError(fmt::format("{} does not depend on E", to_string(which)));
  };
  auto two_arg = [&](const Rate2D& r) {
    if (!second) throw DomainError(fmt::format("{} requires an environment value E", to_string(which)));
    switch (derivative) {
      case Derivative::value: return r(s, *second);
      case Derivative::dE: return r.d_env(*second);
      case Derivative::d2_second_arg: break;
    }
    throw DomainError(fmt::format("derivative unsupported for {}", to_string(which)));
  };
  auto kernel_term = [&]() -> const KernelTerm& {
    if (term >= model.alpha.terms().size()) throw DomainError("kernel term index out of range");
    return model.alpha.terms()[term];
  };

  switch (which) {
    case Ingredient::beta: return one_arg(model.beta);
    case Ingredient::c: return one_arg(model.c);
    case Ingredient::mu: return two_arg(model.mu);
    case Ingredient::gamma: return two_arg(model.gamma);
    case Ingredient::alpha1: return one_arg(kernel_term().alpha1);
    case Ingredient::alpha2: return one_arg(kernel_term().alpha2);
    case Ingredient::alpha: {
      if (!second) throw DomainError("alpha requires a second size argument");
      switch (derivative) {
        case Derivative::value: return model.alpha(s, *second);
        case Derivative::d2_second_arg: return model.alpha.d_second(s, *second);
        case Derivative::dE: break;
      }
      throw DomainError("alpha does not depend on E");
    }
  }
  throw DomainError("unknown ingredient selector");
}

ValidationReport validate_model(const ModelSpec& model, double e_lo, double e_hi, int n_samples,
                                double tail_tolerance) {
  if (e_lo > e_hi) throw DomainError("validate_model requires E_lo <= E_hi");
  if (n_samples < 2) throw DomainError("validate_model requires n_samples >= 2");

  ValidationReport report;
  report.tail_tolerance = tail_tolerance;
  const auto n = static_cast<std::size_t>(n_samples);
  std::vector<double> ss(n), es(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    ss[i] = t * model.s_max;
    es[i] = e_lo + t * (e_hi - e_lo);
  }

  // Keep only the worst offender per ingredient.
  auto note = [&](const std::string& name, double s, std::optional<double> second, double value, double bound) {
    if (value >= bound) return;
    for (auto& v : report.violations) {
      if (v.ingredient == name) {
        if (value < v.value) v = {name, s, second, value};
        return;
      }
    }
    report.violations.push_back({name, s, second, value});
  };

  report.min_gamma = std::numeric_limits<double>::infinity();
  for (double s : ss) {
    note("beta", s, std::nullopt, model.beta(s), 0.0);
    note("c", s, std::nullopt, model.c(s), 0.0);
    for (double e : es) {
      note("mu", s, e, model.mu(s, e), 0.0);
      const double g = model.gamma(s, e);
      report.min_gamma = std::min(report.min_gamma, g);
      note("gamma", s, e, g, model.gamma0);
    }
    for (double s2 : ss) note("alpha", s, s2, model.alpha(s, s2), 0.0);
  }

  report.tail_mass = model.beta.tail_fraction(model.s_max);
  for (const auto& t : model.alpha.terms()) {
    report.tail_mass = std::max(report.tail_mass, t.alpha1.tail_fraction(model.s_max));
  }
  report.ok = report.violations.empty() && report.tail_mass < tail_tolerance;
  return report;
}

}  // namespace canndyn
