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

#include "depthforge/oracle.hpp"

#include <string>

#include "depthforge/error.hpp"

namespace depthforge::oracle {
namespace {

bool MustKeep(const NetworkDescriptor& net, int l) {
  const LayerDescriptor& layer = net.layer(l);
  return net.is_irreducible(l) || layer.stride != 1 || layer.in_channels != layer.out_channels;
}

bool Kept(std::uint32_t mask, int l) { return (mask >> (l - 1)) & 1u; }

// A position p in 1..L-1 is a boundary iff bit p-1 of `activations` is set.
bool IsBoundary(std::uint32_t activations, int p, int layers) {
  return p == 0 || p == layers || ((activations >> (p - 1)) & 1u);
}

bool ActivationSetAdmissible(std::uint32_t activations, const NetworkDescriptor& net) {
  const int layers = net.layer_count();
  for (int b : net.barriers()) {
    if (!IsBoundary(activations, b, layers)) return false;
  }
  for (const SkipAddSpan& span : net.skip_add_spans()) {
    bool cut_inside = false;
    for (int p = span.start + 1; p < span.end; ++p) {
      cut_inside = cut_inside || IsBoundary(activations, p, layers);
    }
    if (cut_inside && !(IsBoundary(activations, span.start, layers) &&
                        IsBoundary(activations, span.end, layers))) {
      return false;
    }
  }
  return true;
}

// Ties go to the set containing the smallest index where the two differ.
bool PreferredOnTie(std::uint32_t candidate, std::uint32_t incumbent) {
  const std::uint32_t diff = candidate ^ incumbent;
  return diff != 0 && (candidate & (diff & (~diff + 1))) != 0;
}

}  // namespace

OracleResult BruteForcePlan(const CostTables& tables, const BudgetSpec& budget,
                            const NetworkDescriptor& net) {
  const int layers = net.layer_count();
  if (layers > kMaxPlanLayers) {
    throw Error(ErrorCode::kGuardLimit, "plan oracle is limited to " +
                                            std::to_string(kMaxPlanLayers) + " layers");
  }
  std::uint32_t forced = 0;
  for (int l = 1; l <= layers; ++l) {
    if (MustKeep(net, l)) forced |= 1u << (l - 1);
  }
  const std::int64_t capacity = budget.capacity();

  OracleResult result;
  std::vector<SegmentKey> keys;
  for (std::uint32_t activations = 0; activations < (1u << (layers - 1)); ++activations) {
    if (!ActivationSetAdmissible(activations, net)) continue;
    std::vector<int> bounds{0};
    for (int p = 1; p < layers; ++p) {
      if (IsBoundary(activations, p, layers)) bounds.push_back(p);
    }
    bounds.push_back(layers);

    for (std::uint32_t convs = 0; convs < (1u << layers); ++convs) {
      if ((convs & forced) != forced) continue;
      ++result.explored;
      double objective = 0.0;
      std::int64_t units = 0;
      bool present = true;
      keys.clear();
      for (std::size_t s = 0; s + 1 < bounds.size() && present; ++s) {
        SegmentKey key{bounds[s], bounds[s + 1], 1, true};
        for (int l = key.start + 1; l <= key.end; ++l) {
          if (!Kept(convs, l)) continue;
          key.kernel_size += net.layer(l).kernel_size - 1;
          key.depthwise = key.depthwise && net.layer(l).groups == net.layer(l).in_channels &&
                          net.layer(l).groups == net.layer(l).out_channels;
        }
        auto lat = tables.latency_ms.find(key);
        auto imp = tables.importance.find(key);
        if (lat == tables.latency_ms.end() || imp == tables.importance.end()) {
          present = false;
          break;
        }
        objective = objective + imp->second;
        units += DiscretizeLatency(lat->second, budget.t0_ms, budget.levels);
        keys.push_back(key);
      }
      if (!present || units > capacity) continue;
      if (!result.feasible || objective > result.objective) {
        result.feasible = true;
        result.objective = objective;
        result.activations.assign(bounds.begin() + 1, bounds.end() - 1);
        result.convs.clear();
        for (int l = 1; l <= layers; ++l) {
          if (Kept(convs, l)) result.convs.push_back(l);
        }
        result.segments.clear();
        for (const SegmentKey& key : keys) {
          result.segments.push_back({key.start, key.end, key.kernel_size, key.depthwise});
        }
      }
    }
  }
  return result;
}

OracleResult BruteForceKeepSet(int i, int j, int kernel_size, const NetworkDescriptor& net,
                               std::optional<bool> depthwise) {
  if (i < 0 || j > net.layer_count() || i >= j) {
    throw Error(ErrorCode::kIndexOutOfRange, "invalid segment");
  }
  const int span = j - i;
  if (span > kMaxKeepSetSpan) {
    throw Error(ErrorCode::kGuardLimit, "keep-set oracle is limited to spans of " +
                                            std::to_string(kMaxKeepSetSpan) + " layers");
  }
  OracleResult result;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < (1u << span); ++mask) {
    ++result.explored;
    int k = 1;
    bool all_depthwise = true;
    bool valid = true;
    double total = 0.0;
    for (int p = 0; p < span; ++p) {
      const int l = i + 1 + p;
      const LayerDescriptor& layer = net.layer(l);
      if (!((mask >> p) & 1u)) {
        if (MustKeep(net, l)) valid = false;
        continue;
      }
      k += layer.kernel_size - 1;
      all_depthwise = all_depthwise && layer.kind == ConvKind::kDepthwise;
      if (!layer.l1_norm) throw Error(ErrorCode::kMissingNorm, "layer without l1_norm");
      total = total + *layer.l1_norm;
    }
    if (!valid || k != kernel_size) continue;
    if (depthwise && *depthwise != all_depthwise) continue;
    if (!result.feasible || total > result.objective ||
        (total == result.objective && PreferredOnTie(mask, best_mask))) {
      result.feasible = true;
      result.objective = total;
      best_mask = mask;
    }
  }
  for (int p = 0; p < span && result.feasible; ++p) {
    if ((best_mask >> p) & 1u) result.convs.push_back(i + 1 + p);
  }
  return result;
}

OracleResult BruteForceKnapsack(std::span<const double> values,
                                std::span<const std::int64_t> costs, std::int64_t capacity,
                                std::span<const bool> forced) {
  const int n = static_cast<int>(values.size());
  if (n > kMaxKnapsackItems) {
    throw Error(ErrorCode::kGuardLimit, "knapsack oracle is limited to " +
                                            std::to_string(kMaxKnapsackItems) + " items");
  }
  if (costs.size() != values.size() || (!forced.empty() && forced.size() != values.size())) {
    throw Error(ErrorCode::kInvalidArgument, "values, costs and forced must have equal length");
  }
  OracleResult result;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    ++result.explored;
    double total = 0.0;
    std::int64_t cost = 0;
    bool valid = true;
    for (int t = 0; t < n; ++t) {
      const bool in = (mask >> t) & 1u;
      if (!in) {
        if (!forced.empty() && forced[t]) valid = false;
        continue;
      }
      total = total + values[t];
      cost += costs[t];
    }
    if (!valid || cost > capacity) continue;
    if (!result.feasible || total > result.objective) {
      result.feasible = true;
      result.objective = total;
      best_mask = mask;
    }
  }
  for (int t = 0; t < n && result.feasible; ++t) {
    if ((best_mask >> t) & 1u) result.convs.push_back(t + 1);
  }
  return result;
}

}  // namespace depthforge::oracle
