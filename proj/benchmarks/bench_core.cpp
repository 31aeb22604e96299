// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>

#include "canndyn/dynamics.hpp"
#include "canndyn/spectral.hpp"
#include "models.hpp"

using namespace canndyn;

namespace {

const fixtures::Proportional kModel{.b0 = 12.0};

SteadyOptions bracket() {
  SteadyOptions o;
  o.n0_lo = 0.01;
  o.n0_hi = 5.0;
  return o;
}

void BM_SolveSteady(benchmark::State& state) {
  const ModelSpec m = kModel.model();
  const auto g = build_grid(m.s_max, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_steady(m, g, bracket()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveSteady)->RangeMultiplier(4)->Range(256, 4096)->Complexity()->Unit(benchmark::kMillisecond);

void BM_CharacteristicK(benchmark::State& state) {
  const ModelSpec m = kModel.model();
  const auto g = build_grid(m.s_max, static_cast<std::size_t>(state.range(0)));
  const auto lin = build_linearization(m, solve_steady(m, g, bracket()));
  double lambda = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(characteristic_K(m, lin, lambda));
    lambda = lambda > 1.0 ? 0.1 : lambda + 0.01;
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CharacteristicK)->RangeMultiplier(4)->Range(256, 16384)->Complexity()->Unit(benchmark::kMicrosecond);

void BM_Step(benchmark::State& state) {
  const ModelSpec m = kModel.model();
  const auto g = build_grid(m.s_max, static_cast<std::size_t>(state.range(0)));
  const auto init = GridFunction::sample(g, [](double s) { return std::exp(-s); });
  const double dt = stable_dt(m, init, nullptr, SimMode::nonlinear, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(step(m, init, nullptr, dt, SimMode::nonlinear));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Step)->RangeMultiplier(4)->Range(256, 16384)->Complexity()->Unit(benchmark::kMicrosecond);

void BM_LinearizedStep(benchmark::State& state) {
  const ModelSpec m = kModel.model();
  const auto g = build_grid(m.s_max, static_cast<std::size_t>(state.range(0)));
  const auto lin = build_linearization(m, solve_steady(m, g, bracket()));
  const auto init = GridFunction::sample(g, [](double s) { return std::exp(-s); });
  const double dt = stable_dt(m, init, &lin, SimMode::linearized, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(step(m, init, &lin, dt, SimMode::linearized));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LinearizedStep)->RangeMultiplier(4)->Range(256, 16384)->Complexity()->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
