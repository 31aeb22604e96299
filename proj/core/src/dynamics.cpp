// SPDX-License-Identifier: Apache-2.0
#include "canndyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "canndyn/error.hpp"

namespace canndyn {

namespace {

/// Per-node coefficients of one transport-reaction step.
struct StepCoefficients {
  std::vector<double> speed;   // transport velocity
  std::vector<double> sink;    // local loss rate
  std::vector<double> source;  // additive source (C action in linearized mode)
  std::vector<double> birth;   // boundary functional weight
  double boundary_speed = 1.0; // left-hand side factor of the renewal condition
};

/// Caches the state-independent samples of the model on a grid.
class Stepper {
 public:
  Stepper(const ModelSpec& model, GridPtr grid, const Linearization* lin, SimMode mode)
      : model_(model), grid_(std::move(grid)), lin_(lin), mode_(mode) {
    if (mode_ == SimMode::linearized) {
      if (lin_ == nullptr) throw DomainError("linearized mode requires a linearization");
      if (lin_->grid().size() != grid_->size()) throw DomainError("linearization lives on a different grid");
      return;
    }
    const std::size_t n = grid_->size();
    beta_.resize(n);
    mu_base_.resize(n);
    gamma_base_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = grid_->node(i);
      beta_[i] = model_.beta(s);
      mu_base_[i] = model_.mu.base()(s);
      gamma_base_[i] = model_.gamma.base()(s);
    }
    for (const auto& term : model_.alpha.terms()) {
      Term t;
      t.prey.resize(n);
      t.a1.resize(n);
      t.a2.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = grid_->node(i);
        t.a1[i] = term.alpha1(s);
        t.a2[i] = term.alpha2(s);
        t.prey[i] = model_.c(s) * t.a1[i];
      }
      terms_.push_back(std::move(t));
    }
  }

  StepCoefficients coefficients(const GridFunction& state) const {
    const std::size_t n = grid_->size();
    StepCoefficients k;
    k.speed.resize(n);
    k.sink.resize(n);
    k.source.assign(n, 0.0);
    if (mode_ == SimMode::linearized) {
      const auto& lin = *lin_;
      for (std::size_t i = 0; i < n; ++i) {
        k.speed[i] = lin.gamma_star[i];
        k.sink[i] = lin.sink[i];
      }
      const GridFunction cu = lin.apply_c(state);
      for (std::size_t i = 0; i < n; ++i) k.source[i] = cu[i];
      k.birth.assign(lin.lambda_weight.values().begin(), lin.lambda_weight.values().end());
      k.boundary_speed = 1.0;
      return k;
    }

    const auto w = grid_->weights();
    std::vector<double> env(n, 0.0);
    std::vector<double> pred(n, 0.0);
    for (const auto& t : terms_) {
      double prey = 0.0;
      double hunters = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        prey += w[i] * t.prey[i] * state[i];
        hunters += w[i] * t.a2[i] * state[i];
      }
      for (std::size_t j = 0; j < n; ++j) {
        env[j] += t.a2[j] * prey;
        pred[j] += t.a1[j] * hunters;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      k.speed[i] = gamma_base_[i] + model_.gamma.env_part(env[i]);
      k.sink[i] = mu_base_[i] + model_.mu.env_part(env[i]) + pred[i];
    }
    k.birth = beta_;
    k.boundary_speed = k.speed[0];
    return k;
  }

  GridFunction advance(const GridFunction& state, const StepCoefficients& k, double dt) const {
    const auto& grid = *grid_;
    const std::size_t n = grid.size();
    GridFunction next(grid_);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(k.speed[i] > 0.0)) throw DomainError(fmt::format("non-positive growth rate at s = {}", grid.node(i)));
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double h = grid.width(i - 1);
      const double courant = dt * k.speed[i] / h;
      if (courant > 1.0 + 1e-12) {
        throw DomainError(fmt::format("CFL violation: dt gamma / h = {} at s = {}", courant, grid.node(i)));
      }
      const double flux_in = k.speed[i - 1] * state[i - 1];
      const double flux_out = k.speed[i] * state[i];
      next[i] = state[i] - dt / h * (flux_out - flux_in) - dt * k.sink[i] * state[i] + dt * k.source[i];
    }
    // Renewal: boundary_speed * n0 = w0 b0 n0 + sum_{i >= 1} w_i b_i n_i.
    const auto w = grid.weights();
    double births = 0.0;
    for (std::size_t i = 1; i < n; ++i) births += w[i] * k.birth[i] * next[i];
    const double denom = k.boundary_speed - w[0] * k.birth[0];
    if (!(denom > 0.0)) throw DomainError("grid too coarse for the renewal condition at s = 0");
    next[0] = births / denom;
    return next;
  }

  double stable_dt(const GridFunction& state, double cfl) const {
    const StepCoefficients k = coefficients(state);
    double rate = 0.0;
    double sink = 0.0;
    for (std::size_t i = 1; i < grid_->size(); ++i) {
      rate = std::max(rate, k.speed[i] / grid_->width(i - 1));
      sink = std::max(sink, k.sink[i]);
    }
    return cfl / (rate + sink);
  }

 private:
  struct Term {
    std::vector<double> prey;  // c alpha1
    std::vector<double> a1;
    std::vector<double> a2;
  };

  const ModelSpec& model_;
  GridPtr grid_;
  const Linearization* lin_;
  SimMode mode_;
  std::vector<double> beta_, mu_base_, gamma_base_;
  std::vector<Term> terms_;
};

double balance_residual(const StepCoefficients& k, const GridFunction& before, const GridFunction& after, double dt) {
  const double norm = l1_norm(before);
  if (norm == 0.0) return 0.0;
  const auto w = before.grid().weights();
  const std::size_t n = before.size();
  double net_sink = 0.0;
  for (std::size_t i = 0; i < n; ++i) net_sink += w[i] * (k.sink[i] * before[i] - k.source[i]);
  const double influx = k.speed[0] * before[0];
  const double outflow = k.speed[n - 1] * before[n - 1];
  const double change = (integrate(after) - integrate(before)) / dt;
  return std::abs(change - (influx - net_sink - outflow)) / norm;
}

GridFunction normalized(const GridFunction& f) {
  GridFunction out = f;
  const double norm = l1_norm(f);
  if (norm > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= norm;
  }
  return out;
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
  const auto w = a.grid().weights();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += w[i] * std::abs(a[i] - b[i]);
  return d;
}

}  // namespace

double stable_dt(const ModelSpec& model, const GridFunction& state, const Linearization* lin, SimMode mode,
                 double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError("cfl must lie in (0, 1]");
  return Stepper(model, state.grid_ptr(), lin, mode).stable_dt(state, cfl);
}

GridFunction step(const ModelSpec& model, const GridFunction& state, const Linearization* lin, double dt,
                  SimMode mode) {
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  const Stepper stepper(model, state.grid_ptr(), lin, mode);
  return stepper.advance(state, stepper.coefficients(state), dt);
}

double mass_balance_residual(const ModelSpec& model, const GridFunction& before, const GridFunction& after, double dt,
                             const Linearization* lin, SimMode mode) {
  const Stepper stepper(model, before.grid_ptr(), lin, mode);
  return balance_residual(stepper.coefficients(before), before, after, dt);
}

SimReport simulate(const ModelSpec& model, const GridFunction& initial, const SimConfig& cfg,
                   const Linearization* lin) {
  if (!(cfg.t_end > 0.0)) throw DomainError("t_end must be > 0");
  if (cfg.record_every < 1) throw DomainError("record_every must be >= 1");
  if (cfg.mode == SimMode::nonlinear && initial.min() < 0.0) {
    throw DomainError("nonlinear simulation requires nonnegative initial data");
  }
  if (!initial.all_finite()) throw DomainError("initial data must be finite");

  const Stepper stepper(model, initial.grid_ptr(), lin, cfg.mode);
  double dt_max = cfg.dt.value_or(0.0);
  if (!cfg.dt) {
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw DomainError("cfl must lie in (0, 1]");
    dt_max = stepper.stable_dt(initial, cfg.cfl);
  }
  if (!(dt_max > 0.0)) throw DomainError("dt must be > 0");
  const auto n_steps = static_cast<long>(std::ceil(cfg.t_end / dt_max - 1e-9));
  const double dt = cfg.t_end / static_cast<double>(n_steps);

  SimReport rep;
  rep.dt = dt;
  std::vector<GridFunction> profiles;
  std::vector<double> snap_times = cfg.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;

  auto record = [&](double t, const GridFunction& st, double residual) {
    rep.times.push_back(t);
    rep.norms.push_back(l1_norm(st));
    rep.boundary_values.push_back(st[0]);
    rep.mass_residuals.push_back(residual);
    rep.min_values.push_back(st.min());
    rep.sup_norms.push_back(st.sup_norm());
    profiles.push_back(normalized(st));
  };
  auto take_snapshots = [&](double t, const GridFunction& st) {
    while (next_snap < snap_times.size() && t >= snap_times[next_snap] - 1e-12) {
      rep.snapshots.emplace_back(t, st);
      ++next_snap;
    }
  };

  GridFunction state = initial;
  record(0.0, state, 0.0);
  take_snapshots(0.0, state);
  for (long k = 1; k <= n_steps; ++k) {
    const StepCoefficients coeff = stepper.coefficients(state);
    GridFunction next = stepper.advance(state, coeff, dt);
    const double t = dt * static_cast<double>(k);
    if (!next.all_finite()) throw ConvergenceError(fmt::format("simulation produced a non-finite state at t = {}", t));
    const bool rec = k % cfg.record_every == 0 || k == n_steps;
    const double residual = rec ? balance_residual(coeff, state, next, dt) : 0.0;
    state = std::move(next);
    if (rec) record(t, state, residual);
    take_snapshots(t, state);
  }
  rep.final_state = state;

  const std::size_t m = rep.times.size();
  rep.window_rates.assign(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    if (rep.norms[k] > 0.0 && rep.norms[k - 1] > 0.0) {
      rep.window_rates[k] = std::log(rep.norms[k] / rep.norms[k - 1]) / (rep.times[k] - rep.times[k - 1]);
    }
  }
  rep.profile_distance.resize(m);
  for (std::size_t k = 0; k < m; ++k) rep.profile_distance[k] = l1_distance(profiles[k], profiles.back());

  // Least-squares slope of ln ||n|| over the final third of the records.
  const std::size_t first = std::min(2 * m / 3, m >= 2 ? m - 2 : 0);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (std::size_t k = first; k < m; ++k) {
    if (!(rep.norms[k] > 0.0)) continue;
    const double y = std::log(rep.norms[k]);
    st += rep.times[k];
    sy += y;
    stt += rep.times[k] * rep.times[k];
    sty += rep.times[k] * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * stt - st * st;
    rep.growth_rate = (count * sty - st * sy) / denom;
  } else {
    rep.growth_rate = -std::numeric_limits<double>::infinity();
  }
  return rep;
}

AegDiagnostic aeg_diagnostic(const SimReport& report, double tol) {
  AegDiagnostic out;
  out.limit_profile = normalized(report.final_state);
  if (!(report.growth_rate > 0.0)) return out;
  out.applicable = true;

  const auto& d = report.profile_distance;
  const std::size_t m = d.size();
  if (m < 4) return out;
  // Distances of unit-mass profiles; changes below 1e-12 are round-off.
  bool monotone = true;
  for (std::size_t k = m / 2; k + 1 < m; ++k) {
    if (d[k + 1] > d[k] + 1e-12) monotone = false;
  }
  out.detected = monotone && d[(3 * m) / 4] < tol;
  return out;
}

}  // namespace canndyn
