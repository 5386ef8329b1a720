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

#include "depthforge/keep_set.hpp"

#include <bit>
#include <string>

#include "depthforge/error.hpp"

namespace depthforge {

KeepSetFrontier::KeepSetFrontier(const NetworkDescriptor& net, int start)
    : net_(&net), start_(start), end_(start) {
  if (start < 0 || start >= net.layer_count()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "segment start " + std::to_string(start) + " out of range");
  }
  states_[0].push_back(Entry{});
  states_[1].emplace_back();
}

bool KeepSetFrontier::Better(const Entry& candidate, const Entry& incumbent) {
  if (candidate.value != incumbent.value) return candidate.value > incumbent.value;
  for (std::size_t w = 0; w < candidate.bits.size(); ++w) {
    const std::uint64_t diff = candidate.bits[w] ^ incumbent.bits[w];
    if (diff != 0) {
      const std::uint64_t lowest = diff & (~diff + 1);
      return (candidate.bits[w] & lowest) != 0;
    }
  }
  return false;
}

void KeepSetFrontier::Extend() {
  if (end_ >= net_->layer_count()) {
    throw Error(ErrorCode::kIndexOutOfRange, "cannot extend past the last layer");
  }
  const int index = end_ + 1;
  const LayerDescriptor& layer = net_->layer(index);
  const int increment = layer.kernel_size - 1;
  const bool removable = net_->removable(index);
  if (!layer.l1_norm) norms_complete_ = false;
  const double norm = layer.l1_norm.value_or(0.0);
  const int position = index - start_ - 1;
  const std::size_t words = static_cast<std::size_t>(position / 64 + 1);

  const std::size_t old_size = states_[0].size();
  Row next[2] = {Row(old_size + increment), Row(old_size + increment)};
  auto offer = [](std::optional<Entry>& slot, Entry&& candidate) {
    if (!slot || Better(candidate, *slot)) slot = std::move(candidate);
  };

  for (int flag = 0; flag < 2; ++flag) {
    for (std::size_t s = 0; s < old_size; ++s) {
      const std::optional<Entry>& entry = states_[flag][s];
      if (!entry) continue;
      Entry base = *entry;
      base.bits.resize(words, 0);
      if (removable) offer(next[flag][s], Entry(base));
      Entry kept = std::move(base);
      kept.value = kept.value + norm;
      kept.bits[position / 64] |= std::uint64_t{1} << (position % 64);
      const int kept_flag = (flag == 1 || !layer.depthwise()) ? 1 : 0;
      offer(next[kept_flag][s + increment], std::move(kept));
    }
  }
  states_[0] = std::move(next[0]);
  states_[1] = std::move(next[1]);
  end_ = index;
}

std::vector<SizeVariant> KeepSetFrontier::Variants() const {
  std::vector<SizeVariant> variants;
  for (std::size_t s = 0; s < states_[0].size(); ++s) {
    if (states_[1][s]) variants.push_back({static_cast<int>(s) + 1, false});
    if (states_[0][s]) variants.push_back({static_cast<int>(s) + 1, true});
  }
  return variants;
}

std::set<int> KeepSetFrontier::KernelSizes() const {
  std::set<int> sizes;
  for (const SizeVariant& v : Variants()) sizes.insert(v.kernel_size);
  return sizes;
}

KeepSetSolution KeepSetFrontier::Materialize(const Entry& entry, int kernel_size,
                                             bool depthwise) const {
  KeepSetSolution solution;
  solution.total_l1 = entry.value;
  solution.achieved_k = kernel_size;
  solution.depthwise_result = depthwise;
  for (int index = start_ + 1; index <= end_; ++index) {
    const int p = index - start_ - 1;
    if (static_cast<std::size_t>(p / 64) < entry.bits.size() &&
        (entry.bits[p / 64] >> (p % 64)) & 1u) {
      solution.keep.push_back(index);
    }
  }
  return solution;
}

std::optional<KeepSetSolution> KeepSetFrontier::Best(int kernel_size,
                                                     std::optional<bool> depthwise) const {
  if (!norms_complete_) {
    throw Error(ErrorCode::kMissingNorm,
                "l1_norm missing on a layer of segment (" + std::to_string(start_) + ", " +
                    std::to_string(end_) + "]");
  }
  if (end_ == start_) return std::nullopt;
  const int s = kernel_size - 1;
  if (s < 0 || static_cast<std::size_t>(s) >= states_[0].size()) return std::nullopt;
  const std::optional<Entry>& dw = states_[0][s];
  const std::optional<Entry>& mixed = states_[1][s];
  if (depthwise.has_value()) {
    const std::optional<Entry>& chosen = *depthwise ? dw : mixed;
    if (!chosen) return std::nullopt;
    return Materialize(*chosen, kernel_size, *depthwise);
  }
  if (dw && (!mixed || Better(*dw, *mixed))) return Materialize(*dw, kernel_size, true);
  if (mixed) return Materialize(*mixed, kernel_size, false);
  return std::nullopt;
}

KeepSetSolution SolveKeepSet(int i, int j, int kernel_size, const NetworkDescriptor& net,
                             std::optional<bool> depthwise) {
  if (!net.SegmentAllowed(i, j)) {
    throw Error(ErrorCode::kSegmentNotAllowed,
                "segment (" + std::to_string(i) + ", " + std::to_string(j) + "] is not allowed");
  }
  KeepSetFrontier frontier(net, i);
  while (frontier.end() < j) frontier.Extend();
  std::optional<KeepSetSolution> best = frontier.Best(kernel_size, depthwise);
  if (!best) {
    throw Error(ErrorCode::kInfeasibleKernelSize,
                "kernel size " + std::to_string(kernel_size) +
                    " is not realizable on segment (" + std::to_string(i) + ", " +
                    std::to_string(j) + "]");
  }
  return *best;
}

ExtendedSets ExtendSets(int i, int j, std::span<const int> keep, int layer_count) {
  ExtendedSets sets;
  for (int l = 1; l <= i; ++l) sets.convs.push_back(l);
  sets.convs.insert(sets.convs.end(), keep.begin(), keep.end());
  for (int l = j + 1; l <= layer_count; ++l) sets.convs.push_back(l);
  for (int l = 1; l <= i; ++l) sets.activations.push_back(l);
  for (int l = j; l <= layer_count - 1; ++l) sets.activations.push_back(l);
  return sets;
}

}  // namespace depthforge
