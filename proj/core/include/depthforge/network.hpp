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

#ifndef DEPTHFORGE_NETWORK_HPP_
#define DEPTHFORGE_NETWORK_HPP_

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depthforge {

enum class ConvKind { kStandard, kDepthwise };

struct FeatureShape {
  int channels = 0;
  int height = 0;
  int width = 0;

  bool operator==(const FeatureShape&) const = default;
};

// One convolution layer of a chain network. Indices are 1-based.
struct LayerDescriptor {
  int index = 0;
  ConvKind kind = ConvKind::kStandard;
  int kernel_size = 1;  // square kernels only
  int stride = 1;
  int in_channels = 1;
  int out_channels = 1;
  int groups = 1;
  std::optional<FeatureShape> in_shape;
  std::optional<FeatureShape> out_shape;
  std::optional<double> l1_norm;
  bool has_activation_after = false;

  bool depthwise() const { return kind == ConvKind::kDepthwise; }
};

// A residual connection: the input of layer `start + 1` is added to the
// output of layer `end`, i.e. the span covers layers (start, end].
struct SkipAddSpan {
  int start = 0;
  int end = 0;

  auto operator<=>(const SkipAddSpan&) const = default;
};

// Output extent of a layer under the block-leading "same" padding model,
// padding = (kernel - 1) / 2.
int SamePaddedExtent(int in_extent, int kernel_size, int stride);

// Barrier positions implied by strided layers: a layer with stride > 1 may
// only be merged with following 1x1 layers, so a barrier is placed right
// before the first following layer whose kernel is larger than 1.
std::set<int> StrideRuleBarriers(std::span<const LayerDescriptor> layers);

// Immutable, validated description of a chain CNN.
//
// Positions b in 1..L-1 denote the boundary between layer b and b+1 (the
// location of activation b). A segment (i, j] covers layers i+1..j.
class NetworkDescriptor {
 public:
  // Validates every invariant and throws depthforge::Error on violation.
  // When `irreducible` is empty-optional it is computed from the shapes.
  // Stride-rule barriers are always added to `barriers`.
  NetworkDescriptor(std::string name, std::vector<LayerDescriptor> layers,
                    std::optional<std::set<int>> irreducible,
                    std::set<int> barriers,
                    std::vector<SkipAddSpan> skip_add_spans);

  const std::string& name() const { return name_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  std::span<const LayerDescriptor> layers() const { return layers_; }
  const LayerDescriptor& layer(int index) const;

  const std::set<int>& irreducible() const { return irreducible_; }
  bool is_irreducible(int index) const { return irreducible_.contains(index); }
  const std::set<int>& barriers() const { return barriers_; }
  const std::vector<SkipAddSpan>& skip_add_spans() const { return spans_; }

  // True when layer `index` can be replaced by the identity kernel.
  bool removable(int index) const;

  // Sum of the kernel sizes of all layers.
  int k0() const;

  // True iff no barrier lies strictly inside (i, j).
  bool SegmentAllowed(int i, int j) const;
  // First barrier strictly inside (i, j), if any.
  std::optional<int> FirstBarrierInside(int i, int j) const;

  // False when the segment has one boundary strictly inside a skip-addition
  // span and the other strictly outside it.
  bool SegmentRespectsSkipAdds(int i, int j) const;
  std::optional<SkipAddSpan> FirstCrossedSpan(int i, int j) const;

  bool SegmentAdmissible(int i, int j) const {
    return SegmentAllowed(i, j) && SegmentRespectsSkipAdds(i, j);
  }

  bool has_all_shapes() const;
  bool has_all_norms() const;

 private:
  std::string name_;
  std::vector<LayerDescriptor> layers_;
  std::set<int> irreducible_;
  std::set<int> barriers_;
  std::vector<SkipAddSpan> spans_;
  std::vector<int> barrier_prefix_;  // barrier_prefix_[b] = #barriers <= b
};

// { l : in_shape(l) != out_shape(l) }. Throws when any layer lacks shapes.
std::set<int> ComputeIrreducible(const NetworkDescriptor& net);

NetworkDescriptor ParseNetwork(std::string_view json_text);
NetworkDescriptor LoadNetwork(const std::filesystem::path& path);
std::string NetworkToJson(const NetworkDescriptor& net);

}  // namespace depthforge

#endif  // DEPTHFORGE_NETWORK_HPP_
