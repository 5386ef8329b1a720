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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "depthforge/error.hpp"
#include "depthforge/keep_set.hpp"
#include "depthforge/oracle.hpp"
#include "support/support.hpp"

namespace depthforge {
namespace {

const std::vector<int> kThree{3, 3, 3};

TEST(SolveKeepSet, PrefersLargestNorms) {
  const NetworkDescriptor net = testing::ChainNet(kThree, {}, {}, {}, {1.0, 2.0, 3.0});
  const KeepSetSolution s = SolveKeepSet(0, 3, 5, net);
  EXPECT_EQ(s.keep, (std::vector<int>{2, 3}));
  EXPECT_EQ(s.total_l1, 5.0);
  EXPECT_EQ(s.achieved_k, 5);
  EXPECT_EQ(oracle::BruteForceKeepSet(0, 3, 5, net).objective, 5.0);
}

TEST(SolveKeepSet, ExtremeSizes) {
  const NetworkDescriptor net = testing::ChainNet(kThree, {}, {}, {}, {1.0, 2.0, 3.0});
  EXPECT_TRUE(SolveKeepSet(0, 3, 1, net).keep.empty());
  EXPECT_EQ(SolveKeepSet(0, 3, 7, net).keep, (std::vector<int>{1, 2, 3}));
  const std::vector<int> ones{1, 1, 3};
  const NetworkDescriptor pointwise = testing::ChainNet(ones, {1, 2});
  EXPECT_EQ(SolveKeepSet(0, 3, 1, pointwise).keep, (std::vector<int>{1, 2}));
}

TEST(SolveKeepSet, HonoursIrreducibleLayers) {
  const NetworkDescriptor net = testing::ChainNet(kThree, {1}, {}, {}, {1.0, 2.0, 3.0});
  const KeepSetSolution s = SolveKeepSet(0, 3, 5, net);
  EXPECT_EQ(s.keep, (std::vector<int>{1, 3}));
  EXPECT_EQ(s.total_l1, 4.0);
  EXPECT_THROW(SolveKeepSet(0, 3, 1, net), Error);
}

TEST(SolveKeepSet, TiesGoToEarliestIndex) {
  const NetworkDescriptor net = testing::ChainNet(kThree, {}, {}, {}, {2.0, 2.0, 2.0});
  EXPECT_EQ(SolveKeepSet(0, 3, 5, net).keep, (std::vector<int>{1, 2}));
  EXPECT_EQ(SolveKeepSet(0, 3, 3, net).keep, std::vector<int>{1});
}

TEST(SolveKeepSet, Errors) {
  const NetworkDescriptor net = testing::ChainNet(kThree, {}, {1});
  EXPECT_THROW(SolveKeepSet(0, 3, 5, net), Error);
  EXPECT_THROW(SolveKeepSet(1, 3, 4, net), Error);
  std::vector<LayerDescriptor> layers(1);
  layers[0].index = 1;
  layers[0].kernel_size = 3;
  layers[0].in_channels = layers[0].out_channels = 2;
  const NetworkDescriptor no_norms("n", layers, std::set<int>{}, {}, {});
  try {
    SolveKeepSet(0, 1, 3, no_norms);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingNorm);
  }
}

TEST(SolveKeepSet, DepthwiseFlagSelectsOutcome) {
  std::vector<LayerDescriptor> layers(2);
  for (int l = 0; l < 2; ++l) {
    layers[l].index = l + 1;
    layers[l].kernel_size = 3;
    layers[l].in_channels = layers[l].out_channels = 4;
    layers[l].groups = l == 0 ? 4 : 1;
    layers[l].kind = l == 0 ? ConvKind::kDepthwise : ConvKind::kStandard;
    layers[l].l1_norm = l == 0 ? 1.0 : 5.0;
  }
  const NetworkDescriptor net("dw", layers, std::set<int>{}, {}, {});
  const KeepSetSolution best = SolveKeepSet(0, 2, 3, net);
  EXPECT_EQ(best.keep, std::vector<int>{2});
  EXPECT_FALSE(best.depthwise_result);
  const KeepSetSolution dw = SolveKeepSet(0, 2, 3, net, true);
  EXPECT_EQ(dw.keep, std::vector<int>{1});
  EXPECT_TRUE(dw.depthwise_result);
  EXPECT_TRUE(SolveKeepSet(0, 2, 1, net).depthwise_result);
}

TEST(SolveKeepSet, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    testing::RandomNetOptions options;
    options.layers = 9;
    options.barrier_prob = 0.0;
    options.coarse_norms = trial % 2 == 0;
    const NetworkDescriptor net = testing::RandomNet(rng, options);
    for (int i = 0; i < net.layer_count(); i += 3) {
      KeepSetFrontier frontier(net, i);
      for (int j = i + 1; j <= net.layer_count(); ++j) {
        frontier.Extend();
        for (const SizeVariant& v : frontier.Variants()) {
          const KeepSetSolution s = *frontier.Best(v.kernel_size, v.depthwise);
          const oracle::OracleResult o =
              oracle::BruteForceKeepSet(i, j, v.kernel_size, net, v.depthwise);
          ASSERT_TRUE(o.feasible);
          EXPECT_EQ(s.total_l1, o.objective);
          EXPECT_EQ(s.keep, o.convs);
          int k = 1;
          for (int l : s.keep) k += net.layer(l).kernel_size - 1;
          EXPECT_EQ(k, v.kernel_size);
          for (int r : net.irreducible()) {
            if (r > i && r <= j) {
              EXPECT_EQ(std::ranges::count(s.keep, r), 1);
            }
          }
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(SolveKeepSet, Deterministic) {
  std::mt19937_64 rng(6);
  testing::RandomNetOptions options;
  options.layers = 12;
  options.coarse_norms = true;
  options.barrier_prob = 0.0;
  const NetworkDescriptor net = testing::RandomNet(rng, options);
  KeepSetFrontier f(net, 0);
  while (f.end() < 12) f.Extend();
  for (int k : f.KernelSizes()) {
    EXPECT_EQ(SolveKeepSet(0, 12, k, net).keep, SolveKeepSet(0, 12, k, net).keep);
  }
}

TEST(ExtendSets, Examples) {
  const ExtendedSets whole = ExtendSets(0, 6, std::vector<int>{2, 5}, 6);
  EXPECT_EQ(whole.convs, (std::vector<int>{2, 5}));
  EXPECT_TRUE(whole.activations.empty());
  const ExtendedSets inner = ExtendSets(2, 4, std::vector<int>{3}, 6);
  EXPECT_EQ(inner.convs, (std::vector<int>{1, 2, 3, 5, 6}));
  EXPECT_EQ(inner.activations, (std::vector<int>{1, 2, 4, 5}));
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j <= 6; ++j) {
      EXPECT_EQ(static_cast<int>(ExtendSets(i, j, {}, 6).activations.size()), i + 6 - j);
    }
  }
}

}  // namespace
}  // namespace depthforge
