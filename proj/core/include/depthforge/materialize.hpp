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

#ifndef DEPTHFORGE_MATERIALIZE_HPP_
#define DEPTHFORGE_MATERIALIZE_HPP_

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "depthforge/kernel.hpp"
#include "depthforge/network.hpp"
#include "depthforge/planner.hpp"

namespace depthforge {

// Checks that kernels[l - 1] matches the geometry of layer l and, when
// norms are given, folds them in. `norms` is empty or has one entry per layer.
std::vector<KernelTensor> PrepareLayerKernels(
    const NetworkDescriptor& net, std::vector<KernelTensor> kernels,
    std::span<const std::optional<BatchNormParams>> norms = {});

// Single kernel for segment (start, end]: removed layers become the identity
// and skip-additions contained in the segment are fused in.
KernelTensor MaterializeSegment(const NetworkDescriptor& net, const PlanSegment& segment,
                                const std::set<int>& kept_convs,
                                std::span<const KernelTensor> layer_kernels);

std::vector<KernelTensor> MaterializePlan(const NetworkDescriptor& net, const MergePlan& plan,
                                          std::span<const KernelTensor> layer_kernels);

// Layer-by-layer evaluation of a segment without padding. Skip-additions add
// the centre crop of the span input.
FeatureMap EvaluateSegmentSequential(const FeatureMap& input, const NetworkDescriptor& net,
                                     const PlanSegment& segment,
                                     const std::set<int>& kept_convs,
                                     std::span<const KernelTensor> layer_kernels);

// max |candidate - reference| / max |reference|; the plain absolute
// difference when the reference is all zeros.
double MaxRelativeError(const FeatureMap& candidate, const FeatureMap& reference);

}  // namespace depthforge

#endif  // DEPTHFORGE_MATERIALIZE_HPP_
