// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "canndyn/dynamics.hpp"
#include "canndyn/ingredients.hpp"
#include "canndyn/linearization.hpp"
#include "canndyn/spectral.hpp"
#include "canndyn/steady.hpp"

namespace canndyn {

// Model documents
//
//   {"beta": Rate1D, "mu": Rate2D, "gamma": Rate2D, "alpha": Kernel, "c": Rate1D,
//    "gamma0": number, "s_max": number}
//   Rate1D = {"family": name, "params": [numbers]}
//   Rate2D = {"base": Rate1D, "feedback": "none"|"linear"|"saturating", "feedback_coeff": number}
//   Kernel = {"terms": [{"alpha1": Rate1D, "alpha2": Rate1D}, ...]}
//
// Errors name the offending path, e.g. "mu.base.params[1]".

/// Throws ModelError on malformed JSON, missing or unknown keys, non-finite
/// numbers and out-of-range parameters.
ModelSpec parse_model_config(std::string_view text);
ModelSpec load_model_file(const std::string& path);
/// Canonical form: keys sorted, two-space indentation, trailing newline.
std::string serialize_model(const ModelSpec& model);

std::string to_json(const ValidationReport& report);
std::string to_json(const SteadyState& state);
std::string to_json(const StabilityVerdict& verdict);
std::string to_json(const SpectralReport& report);

/// Reads a state written by to_json(SteadyState). The node array "s" defines
/// the grid; Spacing is recorded for reference only.
SteadyState parse_steady_state(std::string_view text);
SteadyState load_steady_file(const std::string& path);

/// Fixed-precision CSV with a header row. Every field is checked: a
/// non-finite value throws ConvergenceError naming the column and row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(std::vector<double> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

CsvTable steady_csv(const SteadyState& state);
CsvTable margin_csv(const StabilityVerdict& verdict);
CsvTable spectrum_csv(const SpectralReport& report);
CsvTable sim_csv(const SimReport& report);
CsvTable profile_csv(const GridFunction& f);

/// Writes text to path, throwing Error if the file cannot be opened.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace canndyn
