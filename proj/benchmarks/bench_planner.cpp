// Copyright 2026 The DepthForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "depthforge/keep_set.hpp"
#include "depthforge/planner.hpp"
#include "support/support.hpp"

namespace {

using depthforge::BudgetSpec;
using depthforge::ConstraintSense;

void BM_Solve(benchmark::State& state) {
  const int layers = static_cast<int>(state.range(0));
  const std::int64_t levels = state.range(1);
  std::mt19937_64 rng(11);
  depthforge::testing::RandomNetOptions options;
  options.layers = layers;
  options.irreducible_prob = 0.0;
  options.barrier_prob = 0.0;
  options.span_prob = 0.0;
  const auto net = depthforge::testing::RandomNet(rng, options);
  const auto tables = depthforge::testing::RandomTables(rng, net, 0.05);
  const BudgetSpec budget{0.5 * layers * 0.05, levels, ConstraintSense::kStrict};
  for (auto _ : state) {
    benchmark::DoNotOptimize(depthforge::Solve(tables, budget, net));
  }
}
BENCHMARK(BM_Solve)->Args({25, 100})->Args({50, 200})->Args({100, 400})->Args({100, 1000})
    ->Unit(benchmark::kMillisecond);

void BM_KeepSetSweep(benchmark::State& state) {
  std::mt19937_64 rng(12);
  depthforge::testing::RandomNetOptions options;
  options.layers = static_cast<int>(state.range(0));
  const auto net = depthforge::testing::RandomNet(rng, options);
  for (auto _ : state) {
    depthforge::KeepSetFrontier frontier(net, 0);
    while (frontier.end() < net.layer_count()) {
      frontier.Extend();
      benchmark::DoNotOptimize(frontier.Variants());
    }
  }
}
BENCHMARK(BM_KeepSetSweep)->Arg(12)->Arg(48);

}  // namespace

BENCHMARK_MAIN();
