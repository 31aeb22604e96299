// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "canndyn/io.hpp"
#include "cli.hpp"
#include "models.hpp"

using namespace canndyn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("canndyn_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_model(const fs::path& dir, const ModelSpec& m) {
  const auto path = (dir / "model.json").string();
  write_text_file(path, serialize_model(m));
  return path;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

void check_error_line(const Run& r, int code) {
  CHECK(r.code == code);
  CHECK(count_lines(r.err) == 1);
  const auto j = json::parse(r.err);
  CHECK(j["exit_code"] == code);
  CHECK(j["message"].is_string());
}

}  // namespace

TEST_CASE("validate accepts an admissible model") {
  const auto dir = scratch("validate");
  const auto model = write_model(dir, fixtures::ConstantAlpha{}.model(100.0));
  const auto r = run({"validate", "-m", model, "-o", dir.string()});
  CHECK(r.code == 0);
  const auto j = json::parse(read_text_file((dir / "validation.json").string()));
  CHECK(j["ok"] == true);
  CHECK(r.out.find("validation.json") != std::string::npos);
}

TEST_CASE("stability of the empty state when births outpace deaths") {
  const auto dir = scratch("stability");
  const auto model = write_model(dir, fixtures::ConstantAlpha{}.model(60.0));
  const auto r = run({"stability", "-m", model, "-o", dir.string(), "--state", "trivial", "--grid-cells", "200"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(read_text_file((dir / "stability.json").string()));
  CHECK(j["stable_by_dissipativity"] == false);
  // mu - beta at s = 0.
  CHECK(j["margin"].get<double>() == doctest::Approx(0.1 - 0.5));
  CHECK(count_lines(read_text_file((dir / "margin.csv").string())) == 202);
}

TEST_CASE("spectrum writes one row per scan point") {
  const auto dir = scratch("spectrum");
  const auto model = write_model(dir, fixtures::Proportional{.b0 = 12.0}.model());
  const auto r = run({"spectrum", "-m", model, "-o", dir.string(), "--lambda-range", "-0.4", "5", "--scan", "200",
                      "--n0-bracket", "0.01", "5"});
  REQUIRE(r.code == 0);
  const std::string csv = read_text_file((dir / "spectrum.csv").string());
  CHECK(count_lines(csv) == 201);
  // K tends to 1 as lambda grows.
  const auto last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
  const double K = std::stod(last.substr(last.find(',') + 1));
  CHECK(K == doctest::Approx(1.0).epsilon(0.05));
  const auto j = json::parse(read_text_file((dir / "spectrum.json").string()));
  CHECK(j["lambda_lo"] == -0.4);
  CHECK(j["real_roots_K"].size() >= 1);
}

TEST_CASE("steady and simulate produce their files") {
  const auto dir = scratch("steady");
  const auto model = write_model(dir, fixtures::ConstantAlpha{}.model(40.0));
  auto r = run({"steady", "-m", model, "-o", dir.string(), "--n0-bracket", "0.01", "2"});
  REQUIRE(r.code == 0);
  const auto st = load_steady_file((dir / "steady.json").string());
  CHECK(st.n0 == doctest::Approx(0.24).epsilon(0.01));

  r = run({"simulate", "-m", model, "-o", dir.string(), "--state", (dir / "steady.json").string(), "--t-end", "1",
           "--snapshot", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "sim.csv"));
  CHECK(fs::exists(dir / "snapshot_0.csv"));
  const auto j = json::parse(read_text_file((dir / "sim.json").string()));
  CHECK(j["mode"] == "nonlinear");
  CHECK(j["steps"].get<int>() > 0);
}

TEST_CASE("exit codes and error lines") {
  const auto dir = scratch("errors");
  ModelSpec bad = fixtures::ConstantAlpha{}.model(60.0);
  bad.mu = Rate2D(Rate1D::constant(0.1), Feedback::linear, -0.1);
  const auto bad_model = write_model(dir, bad);
  check_error_line(run({"validate", "-m", bad_model, "-o", dir.string()}), 2);

  const auto model = write_model(dir, fixtures::ConstantAlpha{}.model(60.0));
  // No equilibrium inside the bracket.
  check_error_line(run({"steady", "-m", model, "-o", dir.string(), "--n0-bracket", "1", "2"}), 3);
  check_error_line(run({"steady", "-m", model, "-o", dir.string(), "--grid-cells", "1"}), 4);
  check_error_line(run({"bogus"}), 4);
  check_error_line(run({"steady"}), 4);
  check_error_line(run({"steady", "-m", (dir / "missing.json").string()}), 4);
  check_error_line(run({"sweep", "-m", model, "-o", dir.string(), "--vary", "mu.nothing=0:1:3"}), 4);

  write_text_file((dir / "broken.json").string(), "{\"beta\": 1}");
  check_error_line(run({"steady", "-m", (dir / "broken.json").string()}), 2);
}

TEST_CASE("outputs are deterministic") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto model = write_model(a, fixtures::ConstantAlpha{}.model(40.0));
  for (const auto& dir : {a, b}) {
    REQUIRE(run({"simulate", "-m", model, "-o", dir.string(), "--t-end", "2", "--grid-cells", "200", "--n0-bracket",
                 "0.01", "2"})
                .code == 0);
  }
  CHECK(read_text_file((a / "sim.csv").string()) == read_text_file((b / "sim.csv").string()));
  CHECK(read_text_file((a / "sim.json").string()) == read_text_file((b / "sim.json").string()));
}

TEST_CASE("sweep rows do not depend on the thread count") {
  const auto a = scratch("sweep_a");
  const auto b = scratch("sweep_b");
  const auto model = write_model(a, fixtures::ConstantAlpha{}.model(40.0));
  const std::vector<std::string> common{"--grid-cells", "100", "--vary", "beta.params.0=0.3:0.6:3",
                                        "--vary2",      "mu.base.params.0=0.05:0.15:2", "--t-end", "2"};
  auto args = [&](const fs::path& dir) {
    std::vector<std::string> v{"sweep", "-m", model, "-o", dir.string()};
    v.insert(v.end(), common.begin(), common.end());
    return v;
  };
  ::setenv("CANNDYN_THREADS", "1", 1);
  REQUIRE(run(args(a)).code == 0);
  ::setenv("CANNDYN_THREADS", "2", 1);
  REQUIRE(run(args(b)).code == 0);
  ::unsetenv("CANNDYN_THREADS");
  const std::string csv = read_text_file((a / "sweep.csv").string());
  CHECK(csv == read_text_file((b / "sweep.csv").string()));
  CHECK(count_lines(csv) == 7);
}
