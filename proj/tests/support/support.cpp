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

#include "support.hpp"

#include <cmath>

namespace depthforge::testing {
namespace {

LayerDescriptor MakeLayer(int index, int kernel, int stride, int in, int out, int groups) {
  LayerDescriptor layer;
  layer.index = index;
  layer.kernel_size = kernel;
  layer.stride = stride;
  layer.in_channels = in;
  layer.out_channels = out;
  layer.groups = groups;
  layer.kind = (groups == in && groups == out) ? ConvKind::kDepthwise : ConvKind::kStandard;
  return layer;
}

// Appends a layer with shapes derived from the running feature map.
struct ShapedBuilder {
  std::vector<LayerDescriptor> layers;
  FeatureShape current;

  int Add(int kernel, int stride, int out, int groups, bool activation) {
    LayerDescriptor layer = MakeLayer(static_cast<int>(layers.size()) + 1, kernel, stride,
                                      current.channels, out, groups);
    layer.in_shape = current;
    current = {out, SamePaddedExtent(current.height, kernel, stride),
               SamePaddedExtent(current.width, kernel, stride)};
    layer.out_shape = current;
    layer.l1_norm = static_cast<double>(kernel * kernel * (layer.in_channels / groups) * out) /
                    1000.0;
    layer.has_activation_after = activation;
    layers.push_back(layer);
    return layer.index;
  }
};

}  // namespace

NetworkDescriptor RandomNet(std::mt19937_64& rng, const RandomNetOptions& options) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, options.kernel_choices.size() - 1);
  std::vector<LayerDescriptor> layers;
  std::set<int> irreducible;
  for (int l = 1; l <= options.layers; ++l) {
    const bool depthwise = unit(rng) < options.depthwise_prob;
    LayerDescriptor layer = MakeLayer(l, options.kernel_choices[pick(rng)], 1, options.channels,
                                      options.channels, depthwise ? options.channels : 1);
    layer.l1_norm = options.coarse_norms ? std::floor(unit(rng) * 4.0) : unit(rng) * 10.0;
    layer.has_activation_after = l < options.layers;
    if (unit(rng) < options.irreducible_prob) irreducible.insert(l);
    layers.push_back(layer);
  }
  std::set<int> barriers;
  for (int b = 1; b < options.layers; ++b) {
    if (unit(rng) < options.barrier_prob) barriers.insert(b);
  }
  std::vector<SkipAddSpan> spans;
  if (options.layers >= 2 && unit(rng) < options.span_prob) {
    std::uniform_int_distribution<int> start(0, options.layers - 2);
    const int s = start(rng);
    std::uniform_int_distribution<int> end(s + 2, options.layers);
    spans.push_back({s, end(rng)});
  }
  return NetworkDescriptor("random", std::move(layers), std::move(irreducible),
                           std::move(barriers), std::move(spans));
}

NetworkDescriptor ChainNet(std::span<const int> kernels, std::set<int> irreducible,
                           std::set<int> barriers, std::vector<SkipAddSpan> spans,
                           std::vector<double> norms, int channels) {
  std::vector<LayerDescriptor> layers;
  for (std::size_t p = 0; p < kernels.size(); ++p) {
    LayerDescriptor layer =
        MakeLayer(static_cast<int>(p) + 1, kernels[p], 1, channels, channels, 1);
    layer.l1_norm = norms.empty() ? 1.0 : norms[p];
    layer.has_activation_after = p + 1 < kernels.size();
    layers.push_back(layer);
  }
  return NetworkDescriptor("chain", std::move(layers), std::move(irreducible),
                           std::move(barriers), std::move(spans));
}

CostTables RandomTables(std::mt19937_64& rng, const NetworkDescriptor& net,
                        double max_latency_ms) {
  std::uniform_real_distribution<double> latency(0.0, max_latency_ms);
  std::uniform_real_distribution<double> delta(-1.0, 0.0);
  std::map<SegmentKey, double> latency_ms;
  std::map<SegmentKey, double> importance;
  for (const SegmentKey& key : RequiredKeys(net)) {
    latency_ms[key] = latency(rng);
    importance[key] = std::exp(delta(rng));
  }
  return AssembleCostTables(net, std::move(latency_ms), std::move(importance));
}

KernelTensor RandomKernel(std::mt19937_64& rng, int out_channels, int in_channels,
                          int kernel_size, int stride, int groups) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  KernelTensor kernel(out_channels, in_channels, kernel_size, stride, groups);
  for (double& w : kernel.weights()) w = dist(rng);
  for (double& b : kernel.bias()) b = dist(rng);
  return kernel;
}

FeatureMap RandomFeatureMap(std::mt19937_64& rng, int channels, int height, int width) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FeatureMap map(channels, height, width);
  for (double& v : map.data()) v = dist(rng);
  return map;
}

NetworkDescriptor SyntheticResNet34() {
  ShapedBuilder b{{}, {3, 224, 224}};
  std::vector<SkipAddSpan> spans;
  b.Add(7, 2, 64, 1, true);
  b.current = {64, 56, 56};  // max-pool, not part of the conv chain
  const int stages[4][2] = {{64, 3}, {128, 4}, {256, 6}, {512, 3}};
  for (int s = 0; s < 4; ++s) {
    for (int block = 0; block < stages[s][1]; ++block) {
      const int stride = (s > 0 && block == 0) ? 2 : 1;
      const int first = b.Add(3, stride, stages[s][0], 1, true);
      b.Add(3, 1, stages[s][0], 1, true);
      spans.push_back({first - 1, first + 1});
    }
  }
  b.layers.back().has_activation_after = false;
  return NetworkDescriptor("resnet34", std::move(b.layers), std::nullopt, {1},
                           std::move(spans));
}

NetworkDescriptor SyntheticMobileNetV2() {
  ShapedBuilder b{{}, {3, 224, 224}};
  std::vector<SkipAddSpan> spans;
  b.Add(3, 2, 32, 1, true);
  // (expansion t, channels c, repeats n, first stride s)
  const int settings[7][4] = {{1, 16, 1, 1},  {6, 24, 2, 2},  {6, 32, 3, 2}, {6, 64, 4, 2},
                              {6, 96, 3, 1},  {6, 160, 3, 2}, {6, 320, 1, 1}};
  for (const auto& [t, c, n, s] : settings) {
    for (int r = 0; r < n; ++r) {
      const int stride = r == 0 ? s : 1;
      const int in = b.current.channels;
      const int block_start = static_cast<int>(b.layers.size());
      if (t != 1) b.Add(1, 1, in * t, 1, true);
      const int hidden = b.current.channels;
      b.Add(3, stride, hidden, hidden, true);
      b.Add(1, 1, c, 1, false);  // linear bottleneck
      if (stride == 1 && in == c) {
        spans.push_back({block_start, static_cast<int>(b.layers.size())});
      }
    }
  }
  b.Add(1, 1, 1280, 1, false);
  return NetworkDescriptor("mobilenet_v2", std::move(b.layers), std::nullopt, {},
                           std::move(spans));
}

std::filesystem::path FreshTempDir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("depthforge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path SourceRoot() { return DEPTHFORGE_SOURCE_ROOT; }

}  // namespace depthforge::testing
