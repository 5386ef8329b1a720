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

#include "depthforge/materialize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "depthforge/error.hpp"

namespace depthforge {
namespace {

void CheckSegment(const NetworkDescriptor& net, const PlanSegment& segment,
                  std::span<const KernelTensor> layer_kernels) {
  if (segment.start < 0 || segment.end > net.layer_count() || segment.start >= segment.end) {
    throw Error(ErrorCode::kIndexOutOfRange, "segment (" + std::to_string(segment.start) + ", " +
                                                 std::to_string(segment.end) + "] out of range");
  }
  if (layer_kernels.size() != static_cast<std::size_t>(net.layer_count())) {
    throw Error(ErrorCode::kShapeMismatch, "expected one kernel per layer");
  }
}

const SkipAddSpan* OutermostSpanAt(const NetworkDescriptor& net, int start, int limit,
                                   int outer_start, int outer_end) {
  const SkipAddSpan* found = nullptr;
  for (const SkipAddSpan& span : net.skip_add_spans()) {
    if (span.start != start || span.end > limit) continue;
    if (span.start == outer_start && span.end == outer_end) continue;
    if (found == nullptr || span.end > found->end) found = &span;
  }
  return found;
}

bool HasSpan(const NetworkDescriptor& net, int start, int end) {
  return std::ranges::any_of(net.skip_add_spans(), [&](const SkipAddSpan& s) {
    return s.start == start && s.end == end;
  });
}

KernelTensor LayerOrIdentity(const NetworkDescriptor& net, int l, const std::set<int>& kept,
                             std::span<const KernelTensor> kernels) {
  if (kept.contains(l)) return kernels[l - 1];
  const LayerDescriptor& layer = net.layer(l);
  if (layer.in_channels != layer.out_channels || layer.stride != 1) {
    throw Error(ErrorCode::kChannelMismatch,
                "layer " + std::to_string(l) + " cannot be replaced by the identity");
  }
  return IdentityKernel(layer.in_channels);
}

// Folds layers (a, b], treating every skip-addition span nested strictly
// inside as a single fused unit.
KernelTensor BuildRange(const NetworkDescriptor& net, int a, int b, const std::set<int>& kept,
                        std::span<const KernelTensor> kernels) {
  std::optional<KernelTensor> merged;
  for (int cursor = a; cursor < b;) {
    KernelTensor piece = IdentityKernel(1);
    if (const SkipAddSpan* span = OutermostSpanAt(net, cursor, b, a, b)) {
      piece = AddResidual(BuildRange(net, span->start, span->end, kept, kernels));
      cursor = span->end;
    } else {
      piece = LayerOrIdentity(net, cursor + 1, kept, kernels);
      ++cursor;
    }
    merged = merged ? MergePair(*merged, piece) : std::move(piece);
  }
  return *merged;
}

FeatureMap CenterCrop(const FeatureMap& x, int height, int width) {
  const int dy = (x.height() - height) / 2;
  const int dx = (x.width() - width) / 2;
  FeatureMap out(x.channels(), height, width);
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      for (int w = 0; w < width; ++w) out.at(c, y, w) = x.at(c, y + dy, w + dx);
    }
  }
  return out;
}

FeatureMap EvaluateRange(const FeatureMap& input, const NetworkDescriptor& net, int a, int b,
                         const std::set<int>& kept, std::span<const KernelTensor> kernels) {
  FeatureMap x = input;
  for (int cursor = a; cursor < b;) {
    if (const SkipAddSpan* span = OutermostSpanAt(net, cursor, b, a, b)) {
      FeatureMap y = EvaluateRange(x, net, span->start, span->end, kept, kernels);
      const FeatureMap skip = CenterCrop(x, y.height(), y.width());
      if (skip.channels() != y.channels()) {
        throw Error(ErrorCode::kShapeMismatch, "skip-addition changes the channel count");
      }
      std::ranges::transform(y.data(), skip.data(), y.data().begin(), std::plus<>());
      x = std::move(y);
      cursor = span->end;
    } else {
      x = ConvReference(x, LayerOrIdentity(net, cursor + 1, kept, kernels), 0);
      ++cursor;
    }
  }
  return x;
}

}  // namespace

std::vector<KernelTensor> PrepareLayerKernels(
    const NetworkDescriptor& net, std::vector<KernelTensor> kernels,
    std::span<const std::optional<BatchNormParams>> norms) {
  if (kernels.size() != static_cast<std::size_t>(net.layer_count())) {
    throw Error(ErrorCode::kShapeMismatch, "expected " + std::to_string(net.layer_count()) +
                                               " kernels, got " + std::to_string(kernels.size()));
  }
  if (!norms.empty() && norms.size() != kernels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "expected one normalization entry per layer");
  }
  for (int l = 1; l <= net.layer_count(); ++l) {
    const LayerDescriptor& layer = net.layer(l);
    KernelTensor& kernel = kernels[l - 1];
    if (kernel.out_channels() != layer.out_channels || kernel.in_channels() != layer.in_channels ||
        kernel.kernel_size() != layer.kernel_size || kernel.stride() != layer.stride ||
        kernel.groups() != layer.groups) {
      throw Error(ErrorCode::kShapeMismatch,
                  "kernel of layer " + std::to_string(l) + " does not match the descriptor");
    }
    if (!norms.empty() && norms[l - 1]) kernel = FoldBatchNorm(kernel, *norms[l - 1]);
  }
  return kernels;
}

KernelTensor MaterializeSegment(const NetworkDescriptor& net, const PlanSegment& segment,
                                const std::set<int>& kept_convs,
                                std::span<const KernelTensor> layer_kernels) {
  CheckSegment(net, segment, layer_kernels);
  KernelTensor merged = BuildRange(net, segment.start, segment.end, kept_convs, layer_kernels);
  if (HasSpan(net, segment.start, segment.end)) merged = AddResidual(merged);
  if (merged.kernel_size() != segment.kernel_size) {
    throw Error(ErrorCode::kInfeasibleKernelSize,
                "segment (" + std::to_string(segment.start) + ", " + std::to_string(segment.end) +
                    "] declares kernel size " + std::to_string(segment.kernel_size) +
                    " but its kept layers give " + std::to_string(merged.kernel_size()));
  }
  return merged;
}

std::vector<KernelTensor> MaterializePlan(const NetworkDescriptor& net, const MergePlan& plan,
                                          std::span<const KernelTensor> layer_kernels) {
  const std::set<int> kept(plan.kept_convs.begin(), plan.kept_convs.end());
  std::vector<KernelTensor> out;
  out.reserve(plan.segments.size());
  for (const PlanSegment& seg : plan.segments) {
    out.push_back(MaterializeSegment(net, seg, kept, layer_kernels));
  }
  return out;
}

FeatureMap EvaluateSegmentSequential(const FeatureMap& input, const NetworkDescriptor& net,
                                     const PlanSegment& segment,
                                     const std::set<int>& kept_convs,
                                     std::span<const KernelTensor> layer_kernels) {
  CheckSegment(net, segment, layer_kernels);
  FeatureMap y = EvaluateRange(input, net, segment.start, segment.end, kept_convs, layer_kernels);
  if (HasSpan(net, segment.start, segment.end)) {
    const FeatureMap skip = CenterCrop(input, y.height(), y.width());
    std::ranges::transform(y.data(), skip.data(), y.data().begin(), std::plus<>());
  }
  return y;
}

double MaxRelativeError(const FeatureMap& candidate, const FeatureMap& reference) {
  if (candidate.channels() != reference.channels() || candidate.height() != reference.height() ||
      candidate.width() != reference.width()) {
    throw Error(ErrorCode::kShapeMismatch, "feature maps differ in shape");
  }
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t n = 0; n < reference.data().size(); ++n) {
    diff = std::max(diff, std::abs(candidate.data()[n] - reference.data()[n]));
    scale = std::max(scale, std::abs(reference.data()[n]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace depthforge
