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

#include "depthforge/kernel.hpp"
#include "support/support.hpp"

namespace {

void BM_MergePair(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  std::mt19937_64 rng(13);
  const auto first = depthforge::testing::RandomKernel(rng, channels, channels, k, 1, 1);
  const auto second = depthforge::testing::RandomKernel(rng, channels, channels, k, 1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(depthforge::MergePair(first, second));
  }
}
BENCHMARK(BM_MergePair)->Args({16, 3})->Args({64, 3})->Args({64, 5});

}  // namespace
