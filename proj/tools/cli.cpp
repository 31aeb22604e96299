// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "canndyn/dynamics.hpp"
#include "canndyn/error.hpp"
#include "canndyn/io.hpp"
#include "canndyn/linearization.hpp"
#include "canndyn/spectral.hpp"
#include "canndyn/steady.hpp"

namespace canndyn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GridArgs {
  std::string model_path;
  std::string out_dir = ".";
  std::size_t cells = 400;
  std::optional<double> s_max;
  std::string spacing = "uniform";
};

struct SteadyArgs {
  std::pair<double, double> bracket{0.0, 1.0};
  double fp_tol = 1e-10;
  double damping = 0.5;
  int max_iter = 10000;
};

struct SpectrumArgs {
  std::optional<std::pair<double, double>> range;
  int scan = 200;
  double root_tol = 1e-10;
};

struct SimArgs {
  std::string mode = "nonlinear";
  double t_end = 10.0;
  double cfl = 0.9;
  std::optional<double> dt;
  int record_every = 1;
  std::optional<std::string> initial;
  std::vector<double> snapshots;
};

struct ValidateArgs {
  std::pair<double, double> e_range{0.0, 10.0};
  int samples = 50;
  double tail_tol = 1e-3;
};

struct Axis {
  std::string path;  // dotted, e.g. mu.base.params.0
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  double value(int k) const { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); }
};

void add_grid_options(CLI::App* app, GridArgs& g) {
  app->add_option("-m,--model", g.model_path, "Model JSON document")->required();
  app->add_option("-o,--out", g.out_dir, "Output directory")->capture_default_str();
  app->add_option("--grid-cells", g.cells, "Number of grid cells")->capture_default_str()->check(CLI::Range(2, 10000000));
  app->add_option("--s-max", g.s_max, "Override the truncation size s_max")->check(CLI::PositiveNumber);
  app->add_option("--spacing", g.spacing, "uniform | graded:R")->capture_default_str();
}

void add_steady_options(CLI::App* app, SteadyArgs& s) {
  app->add_option("--n0-bracket", s.bracket, "Bracket for n*(0)")->capture_default_str();
  app->add_option("--fp-tol", s.fp_tol, "Fixed-point tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--damping", s.damping, "Picard damping in (0, 1]")->capture_default_str();
  app->add_option("--max-iter", s.max_iter, "Inner iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_spectrum_options(CLI::App* app, SpectrumArgs& s) {
  app->add_option("--lambda-range", s.range, "Real scan interval LO HI");
  app->add_option("--scan", s.scan, "Number of scan points")->capture_default_str()->check(CLI::Range(2, 10000000));
  app->add_option("--root-tol", s.root_tol, "Root tolerance")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_sim_options(CLI::App* app, SimArgs& s) {
  app->add_option("--mode", s.mode, "nonlinear | linearized")
      ->capture_default_str()
      ->check(CLI::IsMember({"nonlinear", "linearized"}));
  app->add_option("--t-end", s.t_end, "Final time")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--cfl", s.cfl, "CFL number in (0, 1]")->capture_default_str();
  app->add_option("--dt", s.dt, "Fixed time step (overrides --cfl)")->check(CLI::PositiveNumber);
  app->add_option("--record-every", s.record_every, "Record every K steps")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--initial", s.initial, "steady | bump:CENTER,WIDTH,AMP | file:PATH");
}

std::pair<Spacing, std::optional<double>> parse_spacing(const std::string& text) {
  if (text == "uniform") return {Spacing::uniform, std::nullopt};
  if (text.starts_with("graded:")) {
    try {
      return {Spacing::graded, std::stod(text.substr(7))};
    } catch (const std::exception&) {
    }
  }
  throw DomainError(fmt::format("bad --spacing '{}': expected uniform or graded:R", text));
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw DomainError(fmt::format("bad number '{}' in {}", text, what));
  return v;
}

Axis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw DomainError(fmt::format("bad --vary '{}': expected PATH=LO:HI:N", text));
  Axis a;
  a.path = text.substr(0, eq);
  const std::string range = text.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
  if (c2 == std::string::npos) throw DomainError(fmt::format("bad --vary '{}': expected PATH=LO:HI:N", text));
  a.lo = parse_number(range.substr(0, c1), "--vary");
  a.hi = parse_number(range.substr(c1 + 1, c2 - c1 - 1), "--vary");
  const double n = parse_number(range.substr(c2 + 1), "--vary");
  if (n < 1 || n != std::floor(n)) throw DomainError(fmt::format("bad --vary '{}': N must be a positive integer", text));
  a.n = static_cast<int>(n);
  return a;
}

json::json_pointer pointer_for(const std::string& dotted) {
  std::string ptr;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const auto dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw DomainError(fmt::format("bad parameter path '{}'", dotted));
    ptr += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return json::json_pointer(ptr);
}

/// Model document plus the grid requested on the command line.
struct Setup {
  ModelSpec model;
  GridPtr grid;
};

Setup load_setup(const GridArgs& g) {
  Setup s{load_model_file(g.model_path), nullptr};
  if (g.s_max) s.model.s_max = *g.s_max;
  const auto [spacing, ratio] = parse_spacing(g.spacing);
  s.grid = build_grid(s.model.s_max, g.cells, spacing, ratio);
  return s;
}

SteadyOptions steady_options(const SteadyArgs& a) {
  SteadyOptions o;
  o.n0_lo = a.bracket.first;
  o.n0_hi = a.bracket.second;
  o.fp_tol = a.fp_tol;
  o.fp_damping = a.damping;
  o.max_iter = a.max_iter;
  return o;
}

SteadyState resolve_state(const Setup& s, const std::string& which, const SteadyArgs& a) {
  if (which == "trivial") return trivial_steady(s.model, s.grid);
  if (which == "steady") return solve_steady(s.model, s.grid, steady_options(a));
  return load_steady_file(which);
}

GridFunction bump(const GridPtr& grid, double center, double width, double amp) {
  return GridFunction::sample(grid, [=](double x) {
    const double z = (x - center) / width;
    return amp * std::exp(-z * z);
  });
}

GridFunction resolve_initial(const std::string& choice, const SteadyState& state) {
  if (choice == "steady") return state.n;
  if (choice.starts_with("bump:")) {
    std::vector<double> v;
    std::string rest = choice.substr(5);
    std::size_t start = 0;
    while (true) {
      const auto comma = rest.find(',', start);
      v.push_back(parse_number(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start),
                               "--initial"));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (v.size() != 3 || !(v[1] > 0.0)) throw DomainError("bump initial needs CENTER,WIDTH,AMP with WIDTH > 0");
    return bump(state.grid_ptr(), v[0], v[1], v[2]);
  }
  if (choice.starts_with("file:")) {
    // Two-column CSV (s, n) with a header row, interpolated onto the grid.
    const std::string text = read_text_file(choice.substr(5));
    std::vector<double> xs, ys;
    std::size_t pos = text.find('\n');
    while (pos != std::string::npos && pos + 1 < text.size()) {
      const auto end = text.find('\n', pos + 1);
      const std::string line = text.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1);
      pos = end;
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw DomainError("initial file rows must be 's,n'");
      xs.push_back(parse_number(line.substr(0, comma), "initial file"));
      ys.push_back(parse_number(line.substr(comma + 1), "initial file"));
    }
    if (xs.size() < 2) throw DomainError("initial file needs at least two rows");
    return interpolate(state.grid_ptr(), xs, ys);
  }
  throw DomainError(fmt::format("bad --initial '{}'", choice));
}

std::string default_bump(double s_max) { return fmt::format("bump:{},{},1", 0.2 * s_max, 0.05 * s_max); }

struct Writer {
  std::string dir;
  std::ostream& out;

  void operator()(const std::string& name, const std::string& text) const {
    fs::create_directories(dir);
    const std::string path = (fs::path(dir) / name).string();
    write_text_file(path, text);
    out << path << '\n';
  }
};

// Sweep row for one parameter point.
struct SweepRow {
  std::vector<double> params;
  double R0 = 0.0;
  double margin = 0.0;
  double K0 = 0.0;
  std::optional<double> rightmost_root;
  double growth_rate = 0.0;
};

SweepRow sweep_point(const json& base_doc, const std::vector<Axis>& axes, const std::vector<int>& idx,
                     const GridArgs& g, const SteadyArgs& sa, const SpectrumArgs& pa, const SimArgs& ma) {
  json doc = base_doc;
  SweepRow row;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const double v = axes[a].value(idx[a]);
    doc[pointer_for(axes[a].path)] = v;
    row.params.push_back(v);
  }
  ModelSpec model = parse_model_config(doc.dump());
  if (g.s_max) model.s_max = *g.s_max;
  const auto [spacing, ratio] = parse_spacing(g.spacing);
  const GridPtr grid = build_grid(model.s_max, g.cells, spacing, ratio);

  row.R0 = trivial_stability_check(model, grid).R0;
  // Without an equilibrium in the bracket the pipeline falls back to n* = 0.
  SteadyState state = trivial_steady(model, grid);
  try {
    state = solve_steady(model, grid, steady_options(sa));
  } catch (const ConvergenceError&) {
  }
  const Linearization lin = build_linearization(model, state);
  row.margin = dissipativity_margin(model, lin).margin;

  SpectralOptions so;
  if (pa.range) {
    so.lambda_lo = pa.range->first;
    so.lambda_hi = pa.range->second;
  }
  so.n_scan = pa.scan;
  so.root_tol = pa.root_tol;
  const SpectralReport rep = spectral_report(model, lin, so);
  row.K0 = rep.K0;
  for (const auto& r : rep.real_roots_K) {
    if (!row.rightmost_root || r.value > *row.rightmost_root) row.rightmost_root = r.value;
  }

  SimConfig cfg;
  cfg.mode = SimMode::linearized;
  cfg.t_end = ma.t_end;
  cfg.cfl = ma.cfl;
  cfg.dt = ma.dt;
  cfg.record_every = ma.record_every;
  const GridFunction u0 = resolve_initial(ma.initial.value_or(default_bump(model.s_max)), state);
  row.growth_rate = simulate(model, u0, cfg, &lin).growth_rate;
  if (!std::isfinite(row.growth_rate)) throw ConvergenceError("sweep simulation decayed to zero; growth rate undefined");
  return row;
}

std::string sweep_csv(const std::vector<Axis>& axes, const std::vector<SweepRow>& rows) {
  std::string text;
  for (const auto& a : axes) text += a.path + ",";
  text += "R0,margin,K0,rightmost_root,sim_growth_rate\n";
  for (const auto& r : rows) {
    for (double p : r.params) text += fmt::format("{:.17g},", p);
    text += fmt::format("{:.17g},{:.17g},{:.17g},", r.R0, r.margin, r.K0);
    if (r.rightmost_root) text += fmt::format("{:.17g}", *r.rightmost_root);
    text += fmt::format(",{:.17g}\n", r.growth_rate);
  }
  return text;
}

unsigned sweep_threads(std::size_t points) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CANNDYN_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, points));
}

std::vector<SweepRow> run_sweep(const json& doc, const std::vector<Axis>& axes, const GridArgs& g,
                                const SteadyArgs& sa, const SpectrumArgs& pa, const SimArgs& ma) {
  std::vector<std::vector<int>> points;
  if (axes.size() == 1) {
    for (int i = 0; i < axes[0].n; ++i) points.push_back({i});
  } else {
    for (int i = 0; i < axes[0].n; ++i)
      for (int j = 0; j < axes[1].n; ++j) points.push_back({i, j});
  }
  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      try {
        rows[k] = sweep_point(doc, axes, points[k], g, sa, pa, ma);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = points.size();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_threads = sweep_threads(points.size());
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void print_error(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Size-structured cannibalism model toolkit", "canndyn"};
  app.require_subcommand(1);

  GridArgs grid_args;
  SteadyArgs steady_args;
  SpectrumArgs spectrum_args;
  SimArgs sim_args;
  ValidateArgs validate_args;
  std::string state_choice = "steady";
  std::vector<std::string> vary;
  std::string vary2;

  auto* validate = app.add_subcommand("validate", "Check sign and bound assumptions of a model");
  add_grid_options(validate, grid_args);
  validate->add_option("--e-range", validate_args.e_range, "Environment sample range")->capture_default_str();
  validate->add_option("--samples", validate_args.samples, "Samples per axis")->capture_default_str();
  validate->add_option("--tail-tol", validate_args.tail_tol, "Tolerance on the truncated tail")->capture_default_str();

  auto* steady = app.add_subcommand("steady", "Solve for a positive equilibrium");
  add_grid_options(steady, grid_args);
  add_steady_options(steady, steady_args);

  auto* stability = app.add_subcommand("stability", "Dissipativity margin and positivity flags");
  add_grid_options(stability, grid_args);
  add_steady_options(stability, steady_args);
  stability->add_option("--state", state_choice, "trivial | steady | PATH")->capture_default_str();

  auto* spectrum = app.add_subcommand("spectrum", "Scan the characteristic functions on the real axis");
  add_grid_options(spectrum, grid_args);
  add_steady_options(spectrum, steady_args);
  add_spectrum_options(spectrum, spectrum_args);
  spectrum->add_option("--state", state_choice, "trivial | steady | PATH")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Integrate the nonlinear or linearized problem");
  add_grid_options(sim, grid_args);
  add_steady_options(sim, steady_args);
  add_sim_options(sim, sim_args);
  sim->add_option("--state", state_choice, "trivial | steady | PATH")->capture_default_str();
  sim->add_option("--snapshot", sim_args.snapshots, "Write the profile at these times");

  auto* sweep = app.add_subcommand("sweep", "Re-run the analysis over a parameter grid");
  add_grid_options(sweep, grid_args);
  add_steady_options(sweep, steady_args);
  add_spectrum_options(sweep, spectrum_args);
  add_sim_options(sweep, sim_args);
  sweep->add_option("--vary", vary, "PATH=LO:HI:N (dotted path into the model document)")->required()->expected(1);
  sweep->add_option("--vary2", vary2, "Second axis, same syntax");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(e.get_name() == "--help" ? "" : e.get_name());
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what(), ExitCode::usage_error);
    return ExitCode::usage_error;
  }

  const Writer write{grid_args.out_dir, out};
  try {
    if (validate->parsed()) {
      const Setup s = load_setup(grid_args);
      const auto rep = validate_model(s.model, validate_args.e_range.first, validate_args.e_range.second,
                                      validate_args.samples, validate_args.tail_tol);
      write("validation.json", to_json(rep));
      if (!rep.ok) {
        print_error(err, "model", "model violates its assumptions; see validation.json", ExitCode::model_invalid);
        return ExitCode::model_invalid;
      }
    } else if (steady->parsed()) {
      const Setup s = load_setup(grid_args);
      const SteadyState st = solve_steady(s.model, s.grid, steady_options(steady_args));
      write("steady.json", to_json(st));
      write("steady.csv", steady_csv(st).str());
    } else if (stability->parsed()) {
      const Setup s = load_setup(grid_args);
      const SteadyState st = resolve_state(s, state_choice, steady_args);
      const StabilityVerdict v = dissipativity_margin(s.model, build_linearization(s.model, st));
      write("stability.json", to_json(v));
      write("margin.csv", margin_csv(v).str());
    } else if (spectrum->parsed()) {
      const Setup s = load_setup(grid_args);
      const SteadyState st = resolve_state(s, state_choice, steady_args);
      SpectralOptions so;
      if (spectrum_args.range) {
        so.lambda_lo = spectrum_args.range->first;
        so.lambda_hi = spectrum_args.range->second;
      }
      so.n_scan = spectrum_args.scan;
      so.root_tol = spectrum_args.root_tol;
      const SpectralReport rep = spectral_report(s.model, build_linearization(s.model, st), so);
      write("spectrum.json", to_json(rep));
      write("spectrum.csv", spectrum_csv(rep).str());
    } else if (sim->parsed()) {
      const Setup s = load_setup(grid_args);
      const SimMode mode = sim_args.mode == "linearized" ? SimMode::linearized : SimMode::nonlinear;
      const std::string init = sim_args.initial.value_or(mode == SimMode::nonlinear ? "steady" : default_bump(s.model.s_max));
      const bool needs_state = mode == SimMode::linearized || init == "steady";
      const SteadyState st = needs_state ? resolve_state(s, state_choice, steady_args) : trivial_steady(s.model, s.grid);
      std::optional<Linearization> lin;
      if (mode == SimMode::linearized) lin = build_linearization(s.model, st);
      SimConfig cfg;
      cfg.mode = mode;
      cfg.t_end = sim_args.t_end;
      cfg.cfl = sim_args.cfl;
      cfg.dt = sim_args.dt;
      cfg.record_every = sim_args.record_every;
      cfg.snapshot_times = sim_args.snapshots;
      const SimReport rep = simulate(s.model, resolve_initial(init, st), cfg, lin ? &*lin : nullptr);
      const CsvTable table = sim_csv(rep);
      AegDiagnostic aeg;
      if (mode == SimMode::linearized) aeg = aeg_diagnostic(rep, 1e-3);
      json summary = {{"mode", sim_args.mode},
                      {"dt", rep.dt},
                      {"steps", static_cast<long>(std::lround(sim_args.t_end / rep.dt))},
                      {"aeg_applicable", aeg.applicable},
                      {"aeg_detected", aeg.detected}};
      summary["growth_rate"] = std::isfinite(rep.growth_rate) ? json(rep.growth_rate) : json(nullptr);
      write("sim.csv", table.str());
      write("sim.json", summary.dump(2) + "\n");
      for (std::size_t k = 0; k < rep.snapshots.size(); ++k) {
        write(fmt::format("snapshot_{}.csv", k), profile_csv(rep.snapshots[k].second).str());
      }
    } else if (sweep->parsed()) {
      std::vector<Axis> axes{parse_axis(vary.front())};
      if (!vary2.empty()) axes.push_back(parse_axis(vary2));
      const json doc = json::parse(read_text_file(grid_args.model_path), nullptr, false);
      if (doc.is_discarded()) throw ModelError("malformed model document");
      parse_model_config(doc.dump());
      for (const auto& a : axes) {
        const auto ptr = pointer_for(a.path);
        if (!doc.contains(ptr) || !doc.at(ptr).is_number()) {
          throw DomainError(fmt::format("'{}' does not name a numeric model parameter", a.path));
        }
      }
      const auto rows = run_sweep(doc, axes, grid_args, steady_args, spectrum_args, sim_args);
      write("sweep.csv", sweep_csv(axes, rows));
    }
  } catch (const ModelError& e) {
    print_error(err, "model", e.what(), ExitCode::model_invalid);
    return ExitCode::model_invalid;
  } catch (const ConvergenceError& e) {
    print_error(err, "convergence", e.what(), ExitCode::not_converged);
    return ExitCode::not_converged;
  } catch (const DomainError& e) {
    print_error(err, "usage", e.what(), ExitCode::usage_error);
    return ExitCode::usage_error;
  } catch (const json::exception& e) {
    print_error(err, "usage", e.what(), ExitCode::usage_error);
    return ExitCode::usage_error;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), ExitCode::internal_error);
    return ExitCode::internal_error;
  }
  return ExitCode::ok;
}

}  // namespace canndyn::cli
