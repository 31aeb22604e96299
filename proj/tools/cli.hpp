// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace canndyn::cli {

enum ExitCode : int {
  ok = 0,
  internal_error = 1,
  model_invalid = 2,
  not_converged = 3,
  usage_error = 4,
};

/// Runs one `canndyn <verb> ...` invocation. `args` excludes the program
/// name. Files are written under the output directory; their paths are
/// listed on `out`. Failures print a single-line JSON object on `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace canndyn::cli
