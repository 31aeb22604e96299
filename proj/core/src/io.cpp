// SPDX-License-Identifier: Apache-2.0
#include "canndyn/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "canndyn/error.hpp"

namespace canndyn {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& require(const json& obj, const std::string& path, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ModelError(fmt::format("missing key '{}'", join(path, key)));
  return *it;
}

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ModelError(fmt::format("'{}' must be an object", path.empty() ? "<root>" : path));
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw ModelError(fmt::format("unknown key '{}'", join(path, key)));
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ModelError(fmt::format("'{}' must be a number", path));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ModelError(fmt::format("'{}' is not finite", path));
  return v;
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ModelError(fmt::format("'{}' must be a string", path));
  return j.get<std::string>();
}

// Re-raises constructor errors with the path of the object being built.
template <class F>
auto at_path(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ModelError& e) {
    throw ModelError(fmt::format("{}: {}", path, e.what()));
  }
}

Rate1D parse_rate1d(const json& j, const std::string& path) {
  require_object(j, path, {"family", "params"});
  const std::string family = string(require(j, path, "family"), join(path, "family"));
  const json& params = require(j, path, "params");
  const std::string ppath = join(path, "params");
  if (!params.is_array()) throw ModelError(fmt::format("'{}' must be an array", ppath));
  std::vector<double> values;
  for (std::size_t i = 0; i < params.size(); ++i) values.push_back(number(params[i], fmt::format("{}[{}]", ppath, i)));
  return at_path(path, [&] { return Rate1D(parse_family(family), std::move(values)); });
}

Rate2D parse_rate2d(const json& j, const std::string& path) {
  require_object(j, path, {"base", "feedback", "feedback_coeff"});
  Rate1D base = parse_rate1d(require(j, path, "base"), join(path, "base"));
  const std::string fb = string(require(j, path, "feedback"), join(path, "feedback"));
  const double coeff = number(require(j, path, "feedback_coeff"), join(path, "feedback_coeff"));
  return at_path(path, [&] { return Rate2D(std::move(base), parse_feedback(fb), coeff); });
}

AttackKernel parse_kernel(const json& j, const std::string& path) {
  require_object(j, path, {"terms"});
  const json& terms = require(j, path, "terms");
  const std::string tpath = join(path, "terms");
  if (!terms.is_array() || terms.empty()) throw ModelError(fmt::format("'{}' must be a non-empty array", tpath));
  std::vector<KernelTerm> out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = fmt::format("{}[{}]", tpath, i);
    require_object(terms[i], p, {"alpha1", "alpha2"});
    out.push_back({parse_rate1d(require(terms[i], p, "alpha1"), join(p, "alpha1")),
                   parse_rate1d(require(terms[i], p, "alpha2"), join(p, "alpha2"))});
  }
  return AttackKernel(std::move(out));
}

json rate1d_json(const Rate1D& r) { return {{"family", to_string(r.family())}, {"params", r.params()}}; }

json rate2d_json(const Rate2D& r) {
  return {{"base", rate1d_json(r.base())}, {"feedback", to_string(r.feedback())}, {"feedback_coeff", r.feedback_coeff()}};
}

json values(const GridFunction& f) { return std::vector<double>(f.values().begin(), f.values().end()); }

std::vector<double> number_array(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw DomainError(fmt::format("state file: '{}' must be an array", key));
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw DomainError(fmt::format("state file: '{}' holds a non-finite entry", key));
    }
    out.push_back(v.get<double>());
  }
  return out;
}

json root_json(const Root& r) {
  return {{"value", r.value}, {"bracket_lo", r.bracket_lo}, {"bracket_hi", r.bracket_hi}, {"residual", r.residual}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

ModelSpec parse_model_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(fmt::format("malformed model document: {}", e.what()));
  }
  require_object(doc, "", {"beta", "mu", "gamma", "alpha", "c", "gamma0", "s_max"});
  ModelSpec m;
  m.beta = parse_rate1d(require(doc, "", "beta"), "beta");
  m.mu = parse_rate2d(require(doc, "", "mu"), "mu");
  m.gamma = parse_rate2d(require(doc, "", "gamma"), "gamma");
  m.alpha = parse_kernel(require(doc, "", "alpha"), "alpha");
  m.c = parse_rate1d(require(doc, "", "c"), "c");
  m.gamma0 = number(require(doc, "", "gamma0"), "gamma0");
  m.s_max = number(require(doc, "", "s_max"), "s_max");
  if (m.gamma0 < 0.0) throw ModelError("gamma0 must be nonnegative");
  check_model_scalars(m);
  return m;
}

ModelSpec load_model_file(const std::string& path) { return parse_model_config(read_text_file(path)); }

std::string serialize_model(const ModelSpec& model) {
  json terms = json::array();
  for (const auto& t : model.alpha.terms()) terms.push_back({{"alpha1", rate1d_json(t.alpha1)}, {"alpha2", rate1d_json(t.alpha2)}});
  const json doc = {{"beta", rate1d_json(model.beta)},
                    {"mu", rate2d_json(model.mu)},
                    {"gamma", rate2d_json(model.gamma)},
                    {"alpha", {{"terms", terms}}},
                    {"c", rate1d_json(model.c)},
                    {"gamma0", model.gamma0},
                    {"s_max", model.s_max}};
  return dump(doc);
}

std::string to_json(const ValidationReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations) {
    json item = {{"ingredient", v.ingredient}, {"s", v.s}, {"value", v.value}};
    item["second"] = v.second ? json(*v.second) : json(nullptr);
    violations.push_back(item);
  }
  return dump({{"ok", report.ok},
               {"violations", violations},
               {"min_gamma", report.min_gamma},
               {"tail_mass", report.tail_mass},
               {"tail_tolerance", report.tail_tolerance}});
}

std::string to_json(const SteadyState& state) {
  const auto nodes = state.grid().nodes();
  return dump({{"n0", state.n0},
               {"residual_fp", state.residual_fp},
               {"residual_R", state.residual_R},
               {"trivial", state.is_trivial()},
               {"spacing", state.grid().spacing() == Spacing::graded ? "graded" : "uniform"},
               {"s", std::vector<double>(nodes.begin(), nodes.end())},
               {"n", values(state.n)},
               {"E", values(state.E)},
               {"M", values(state.M)}});
}

std::string to_json(const StabilityVerdict& verdict) {
  return dump({{"margin", verdict.margin},
               {"kappa", verdict.margin},
               {"stable_by_dissipativity", verdict.stable_by_dissipativity},
               {"positivity_pos1", verdict.positivity_pos1},
               {"positivity_pos2", verdict.positivity_pos2},
               {"aeg_hypotheses_met", verdict.aeg_hypotheses_met}});
}

std::string to_json(const SpectralReport& report) {
  json k_roots = json::array();
  for (const auto& r : report.real_roots_K) k_roots.push_back(root_json(r));
  json l_roots = json::array();
  for (const auto& r : report.L_roots) l_roots.push_back(root_json(r));
  return dump({{"lambda_lo", report.lambda_lo},
               {"lambda_hi", report.lambda_hi},
               {"n_scan", report.samples.size()},
               {"K0", report.K0},
               {"unstable_by_K0", report.unstable_by_K0},
               {"Lprime0", report.Lprime0},
               {"mu0", report.mu0},
               {"real_roots_K", k_roots},
               {"L_roots", l_roots},
               {"note", SpectralReport::scan_note}});
}

SteadyState parse_steady_state(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(fmt::format("malformed state file: {}", e.what()));
  }
  if (!doc.is_object()) throw DomainError("state file must hold an object");
  const auto s = number_array(doc, "s");
  const Spacing spacing = doc.value("spacing", "uniform") == "graded" ? Spacing::graded : Spacing::uniform;
  const GridPtr grid = Grid::from_nodes(s, spacing);
  auto field = [&](const char* key) {
    auto v = number_array(doc, key);
    if (v.size() != s.size()) throw DomainError(fmt::format("state file: '{}' has {} entries, expected {}", key, v.size(), s.size()));
    return GridFunction(grid, std::move(v));
  };
  SteadyState st;
  st.n = field("n");
  st.E = field("E");
  st.M = field("M");
  st.n0 = st.n[0];
  st.residual_fp = doc.value("residual_fp", 0.0);
  st.residual_R = doc.value("residual_R", 0.0);
  return st;
}

SteadyState load_steady_file(const std::string& path) { return parse_steady_state(read_text_file(path)); }

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != columns_.size()) throw Error("CSV row width does not match the header");
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (!std::isfinite(row[k])) {
      throw ConvergenceError(fmt::format("non-finite value in column '{}' at row {}", columns_[k], rows_.size()));
    }
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out = fmt::format("{}\n", fmt::join(columns_, ","));
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out += ',';
      out += fmt::format("{:.17g}", row[k]);
    }
    out += '\n';
  }
  return out;
}

CsvTable steady_csv(const SteadyState& state) {
  CsvTable t({"s", "n", "E", "M"});
  for (std::size_t i = 0; i < state.n.size(); ++i) t.add_row({state.grid().node(i), state.n[i], state.E[i], state.M[i]});
  return t;
}

CsvTable margin_csv(const StabilityVerdict& verdict) {
  CsvTable t({"s", "margin"});
  const auto& f = verdict.margin_profile;
  for (std::size_t i = 0; i < f.size(); ++i) t.add_row({f.grid().node(i), f[i]});
  return t;
}

CsvTable spectrum_csv(const SpectralReport& report) {
  CsvTable t({"lambda", "K", "L", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"});
  for (const auto& s : report.samples) {
    std::vector<double> row{s.lambda, s.K, s.L};
    row.insert(row.end(), s.a.begin(), s.a.end());
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable sim_csv(const SimReport& report) {
  CsvTable t({"t", "norm", "boundary", "growth_window_rate", "profile_distance", "mass_residual", "min_value"});
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    t.add_row({report.times[k], report.norms[k], report.boundary_values[k], report.window_rates[k],
               report.profile_distance[k], report.mass_residuals[k], report.min_values[k]});
  }
  return t;
}

CsvTable profile_csv(const GridFunction& f) {
  CsvTable t({"s", "n"});
  for (std::size_t i = 0; i < f.size(); ++i) t.add_row({f.grid().node(i), f[i]});
  return t;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path));
  out << text;
  if (!out) throw Error(fmt::format("failed writing '{}'", path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError(fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace canndyn
