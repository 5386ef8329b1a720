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

#ifndef DEPTHFORGE_TESTS_SUPPORT_HPP_
#define DEPTHFORGE_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "depthforge/cost_tables.hpp"
#include "depthforge/kernel.hpp"
#include "depthforge/network.hpp"

namespace depthforge::testing {

struct RandomNetOptions {
  int layers = 6;
  std::vector<int> kernel_choices{1, 3, 5};
  double irreducible_prob = 0.25;
  double barrier_prob = 0.2;
  double depthwise_prob = 0.3;
  double span_prob = 0.3;
  int channels = 4;
  // Draw norms from a small set so that equal l1 sums occur.
  bool coarse_norms = false;
};

// Shape-free chain with equal channel counts; R, barriers, depthwise layers
// and skip-addition spans are drawn at random.
NetworkDescriptor RandomNet(std::mt19937_64& rng, const RandomNetOptions& options);

// Stride-1 chain with the given kernels and norms (all 1.0 when empty).
NetworkDescriptor ChainNet(std::span<const int> kernels, std::set<int> irreducible = {},
                           std::set<int> barriers = {}, std::vector<SkipAddSpan> spans = {},
                           std::vector<double> norms = {}, int channels = 4);

// Random latencies in [0, max_latency_ms] and random importances for every
// required key of `net`.
CostTables RandomTables(std::mt19937_64& rng, const NetworkDescriptor& net,
                        double max_latency_ms);

KernelTensor RandomKernel(std::mt19937_64& rng, int out_channels, int in_channels,
                          int kernel_size, int stride, int groups);
FeatureMap RandomFeatureMap(std::mt19937_64& rng, int channels, int height, int width);

// Conv-only chains with the shapes of the torchvision reference models at
// 224x224 input: residual blocks become skip-addition spans, downsample
// projections are left out of the chain.
NetworkDescriptor SyntheticResNet34();
NetworkDescriptor SyntheticMobileNetV2();

std::filesystem::path FreshTempDir(const std::string& name);

std::filesystem::path SourceRoot();

}  // namespace depthforge::testing

#endif  // DEPTHFORGE_TESTS_SUPPORT_HPP_
