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

#include <random>

#include "depthforge/error.hpp"
#include "depthforge/materialize.hpp"
#include "support/support.hpp"

namespace depthforge {
namespace {

FeatureMap CentreCrop(const FeatureMap& x, int height, int width) {
  const int dy = (x.height() - height) / 2;
  const int dx = (x.width() - width) / 2;
  FeatureMap y(x.channels(), height, width);
  for (int c = 0; c < x.channels(); ++c) {
    for (int r = 0; r < height; ++r) {
      for (int q = 0; q < width; ++q) y.at(c, r, q) = x.at(c, r + dy, q + dx);
    }
  }
  return y;
}

FeatureMap Add(FeatureMap a, const FeatureMap& b) {
  for (std::size_t n = 0; n < a.data().size(); ++n) a.data()[n] += b.data()[n];
  return a;
}

std::vector<KernelTensor> ChainKernels(std::mt19937_64& rng, std::span<const int> sizes,
                                       int channels) {
  std::vector<KernelTensor> kernels;
  for (int k : sizes) kernels.push_back(testing::RandomKernel(rng, channels, channels, k, 1, 1));
  return kernels;
}

TEST(MaterializeSegment, FusesNestedSkipAdditions) {
  const std::vector<int> sizes{3, 3, 3, 3};
  const NetworkDescriptor net = testing::ChainNet(sizes, {}, {}, {{0, 4}, {1, 3}});
  std::mt19937_64 rng(1);
  const auto kernels = ChainKernels(rng, sizes, 4);
  const std::set<int> kept{1, 2, 3, 4};
  const PlanSegment seg{0, 4, 9, false};
  const KernelTensor merged = MaterializeSegment(net, seg, kept, kernels);
  EXPECT_EQ(merged.kernel_size(), 9);

  const FeatureMap x0 = testing::RandomFeatureMap(rng, 4, 13, 13);
  const FeatureMap x1 = ConvReference(x0, kernels[0], 0);
  const FeatureMap x2 = ConvReference(x1, kernels[1], 0);
  FeatureMap x3 = ConvReference(x2, kernels[2], 0);
  x3 = Add(x3, CentreCrop(x1, x3.height(), x3.width()));
  FeatureMap x4 = ConvReference(x3, kernels[3], 0);
  x4 = Add(x4, CentreCrop(x0, x4.height(), x4.width()));

  const FeatureMap fused = ConvReference(x0, merged, 0);
  EXPECT_LE(MaxRelativeError(fused, x4), 1e-12);
  EXPECT_LE(MaxRelativeError(EvaluateSegmentSequential(x0, net, seg, kept, kernels), x4), 1e-12);
}

TEST(MaterializeSegment, RemovedLayersBecomeIdentity) {
  const std::vector<int> sizes{3, 3, 3};
  const NetworkDescriptor net = testing::ChainNet(sizes);
  std::mt19937_64 rng(2);
  const auto kernels = ChainKernels(rng, sizes, 4);
  const KernelTensor merged = MaterializeSegment(net, {0, 3, 5, false}, {1, 3}, kernels);
  EXPECT_EQ(merged.kernel_size(), 5);
  const FeatureMap x = testing::RandomFeatureMap(rng, 4, 9, 9);
  const FeatureMap expected = ConvReference(ConvReference(x, kernels[0], 0), kernels[2], 0);
  EXPECT_LE(MaxRelativeError(ConvReference(x, merged, 0), expected), 1e-12);

  const KernelTensor none = MaterializeSegment(net, {0, 3, 1, true}, {}, kernels);
  EXPECT_EQ(none.kernel_size(), 1);
  EXPECT_LE(MaxRelativeError(ConvReference(x, none, 0), x), 0.0);
}

TEST(MaterializeSegment, RejectsKernelSizeMismatch) {
  const std::vector<int> sizes{3, 3};
  const NetworkDescriptor net = testing::ChainNet(sizes);
  std::mt19937_64 rng(3);
  const auto kernels = ChainKernels(rng, sizes, 4);
  EXPECT_THROW(MaterializeSegment(net, {0, 2, 3, false}, {1, 2}, kernels), Error);
}

TEST(MaterializeSegment, StridedLayerWithPointwiseFollower) {
  std::vector<LayerDescriptor> layers(2);
  layers[0] = {1, ConvKind::kStandard, 3, 2, 4, 4, 1, {}, {}, 1.0, true};
  layers[1] = {2, ConvKind::kStandard, 1, 1, 4, 6, 1, {}, {}, 1.0, false};
  const NetworkDescriptor net("strided", layers, std::set<int>{2}, {}, {});
  std::mt19937_64 rng(4);
  std::vector<KernelTensor> kernels{testing::RandomKernel(rng, 4, 4, 3, 2, 1),
                                    testing::RandomKernel(rng, 6, 4, 1, 1, 1)};
  const PlanSegment seg{0, 2, 3, false};
  const KernelTensor merged = MaterializeSegment(net, seg, {1, 2}, kernels);
  EXPECT_EQ(merged.stride(), 2);
  EXPECT_EQ(merged.out_channels(), 6);
  const FeatureMap x = testing::RandomFeatureMap(rng, 4, 11, 11);
  const FeatureMap expected = ConvReference(ConvReference(x, kernels[0], 0), kernels[1], 0);
  EXPECT_LE(MaxRelativeError(ConvReference(x, merged, 0), expected), 1e-12);
}

TEST(MaterializePlan, OneKernelPerSegment) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    testing::RandomNetOptions options;
    options.layers = 6;
    options.depthwise_prob = 0.0;
    const NetworkDescriptor net = testing::RandomNet(rng, options);
    const CostTables tables = testing::RandomTables(rng, net, 1.0);
    const MergePlan plan = Solve(tables, {6.0, 60, ConstraintSense::kStrict}, net);
    std::vector<KernelTensor> kernels;
    for (const LayerDescriptor& layer : net.layers()) {
      kernels.push_back(testing::RandomKernel(rng, layer.out_channels, layer.in_channels,
                                              layer.kernel_size, layer.stride, layer.groups));
    }
    const auto merged = MaterializePlan(net, plan, kernels);
    ASSERT_EQ(merged.size(), plan.segments.size());
    for (std::size_t s = 0; s < merged.size(); ++s) {
      EXPECT_EQ(merged[s].kernel_size(), plan.segments[s].kernel_size);
      EXPECT_EQ(merged[s].depthwise(), plan.segments[s].depthwise);
    }
  }
}

TEST(PrepareLayerKernels, FoldsNormsAndChecksGeometry) {
  const std::vector<int> sizes{3, 1};
  const NetworkDescriptor net = testing::ChainNet(sizes);
  std::mt19937_64 rng(6);
  const auto kernels = ChainKernels(rng, sizes, 4);
  BatchNormParams bn{{1.5, 0.5, 2.0, 1.0}, {0.1, -0.2, 0.0, 0.3}, {0.2, 0.0, -0.1, 0.5},
                     {1.0, 2.0, 0.5, 0.25}, 1e-5};
  const std::vector<std::optional<BatchNormParams>> norms{bn, std::nullopt};
  const auto prepared = PrepareLayerKernels(net, kernels, norms);
  const FeatureMap x = testing::RandomFeatureMap(rng, 4, 6, 6);
  EXPECT_LE(MaxRelativeError(ConvReference(x, prepared[0], 0),
                             ApplyBatchNorm(ConvReference(x, kernels[0], 0), bn)),
            1e-12);
  EXPECT_EQ(prepared[1].weights()[0], kernels[1].weights()[0]);

  auto wrong = kernels;
  wrong[1] = testing::RandomKernel(rng, 4, 4, 3, 1, 1);
  EXPECT_THROW(PrepareLayerKernels(net, wrong), Error);
  wrong.pop_back();
  EXPECT_THROW(PrepareLayerKernels(net, wrong), Error);
}

TEST(MaxRelativeError, ScalesByReference) {
  FeatureMap a(1, 1, 2, {1.0, 2.0});
  FeatureMap b(1, 1, 2, {1.0, 4.0});
  EXPECT_DOUBLE_EQ(MaxRelativeError(a, b), 0.5);
  FeatureMap zero(1, 1, 2, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(MaxRelativeError(a, zero), 2.0);
}

}  // namespace
}  // namespace depthforge
