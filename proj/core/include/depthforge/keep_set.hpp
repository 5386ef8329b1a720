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

#ifndef DEPTHFORGE_KEEP_SET_HPP_
#define DEPTHFORGE_KEEP_SET_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "depthforge/network.hpp"

namespace depthforge {

// Which layers of a segment (i, j] stay convolutions after merging; the rest
// become identity kernels.
struct KeepSetSolution {
  std::vector<int> keep;  // ascending layer indices
  double total_l1 = 0.0;  // summed in ascending index order starting from 0.0
  int achieved_k = 1;
  bool depthwise_result = true;  // every kept layer is depthwise (or none kept)
};

// A merged kernel size realizable on a segment, together with whether the
// merged layer is depthwise.
struct SizeVariant {
  int kernel_size = 1;
  bool depthwise = false;

  auto operator<=>(const SizeVariant&) const = default;
};

// Subset-sum DP over kernel increments (Ker - 1) for every segment that
// starts at a fixed position. Extend() appends the next layer, so all
// segments (start, start+1], (start, start+2], ... are solved in one sweep.
//
// For each increment total and depthwise outcome the frontier keeps the
// maximal l1 sum. Ties are broken toward the keep set that contains the
// smallest index at which two candidates differ.
class KeepSetFrontier {
 public:
  KeepSetFrontier(const NetworkDescriptor& net, int start);

  int start() const { return start_; }
  int end() const { return end_; }
  void Extend();

  std::vector<SizeVariant> Variants() const;
  std::set<int> KernelSizes() const;

  // nullopt when (k, depthwise) is not realizable. Passing no depthwise
  // constraint returns the better of the two outcomes.
  std::optional<KeepSetSolution> Best(int kernel_size,
                                      std::optional<bool> depthwise = std::nullopt) const;

 private:
  struct Entry {
    double value = 0.0;
    std::vector<std::uint64_t> bits;  // bit p <=> layer start + 1 + p kept
  };
  // states_[flag][increment]; flag 1 once a non-depthwise layer is kept.
  using Row = std::vector<std::optional<Entry>>;

  static bool Better(const Entry& candidate, const Entry& incumbent);
  KeepSetSolution Materialize(const Entry& entry, int kernel_size, bool depthwise) const;

  const NetworkDescriptor* net_;
  int start_;
  int end_;
  bool norms_complete_ = true;
  Row states_[2];
};

// Exact maximizer of the kept-layer l1 sum over keep sets of (i, j] whose
// merged kernel size is k, with every irreducible layer kept.
KeepSetSolution SolveKeepSet(int i, int j, int kernel_size, const NetworkDescriptor& net,
                             std::optional<bool> depthwise = std::nullopt);

// The network-wide conv and activation keep sets used when only segment
// (i, j] is replaced by its merged layer.
struct ExtendedSets {
  std::vector<int> convs;        // {1..i} u keep u {j+1..L}
  std::vector<int> activations;  // {1..i} u {j..L-1}
};
ExtendedSets ExtendSets(int i, int j, std::span<const int> keep, int layer_count);

}  // namespace depthforge

#endif  // DEPTHFORGE_KEEP_SET_HPP_
