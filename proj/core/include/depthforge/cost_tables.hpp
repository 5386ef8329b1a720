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

#ifndef DEPTHFORGE_COST_TABLES_HPP_
#define DEPTHFORGE_COST_TABLES_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "depthforge/keep_set.hpp"
#include "depthforge/latency_provider.hpp"
#include "depthforge/network.hpp"
#include "depthforge/segment_key.hpp"

namespace depthforge {

using SegmentRange = std::pair<int, int>;  // (i, j]

// Latency and importance lookup tables over merged layers.
struct CostTables {
  int layer_count = 0;
  int k0 = 0;
  std::map<SegmentKey, double> latency_ms;
  std::map<SegmentKey, double> importance;
  std::map<SegmentRange, std::vector<int>> feasible_sizes;  // K_ij, ascending
};

// K_ij: merged kernel sizes reachable on (i, j] with all irreducible layers
// kept. Throws when the segment crosses a barrier.
std::set<int> EnumerateKernelSizes(int i, int j, const NetworkDescriptor& net);
std::vector<SizeVariant> EnumerateSizeVariants(int i, int j, const NetworkDescriptor& net);

// Every table key the planner may consult: one per admissible segment and
// realizable (kernel size, depthwise) outcome, in ascending key order.
std::vector<SegmentKey> RequiredKeys(const NetworkDescriptor& net);

// Geometry of the merged layer for `key`, using the l1-optimal keep set.
LatencyQuery MakeLatencyQuery(const NetworkDescriptor& net, const SegmentKey& key,
                              const KeepSetSolution& keep);

// Queries `provider` for every required key. Rows are processed by up to
// `threads` workers; the result does not depend on the worker count.
std::map<SegmentKey, double> BuildLatencyTable(const NetworkDescriptor& net,
                                               const LatencyProvider& provider,
                                               int threads = 1);

// Latency of every original layer on its own, in layer order.
std::vector<double> SingleLayerLatencies(const NetworkDescriptor& net,
                                         const LatencyProvider& provider);

struct RawPerfMeasurement {
  SegmentKey key;
  double perf_pruned = 0.0;
  double perf_original = 0.0;
};

std::vector<RawPerfMeasurement> ParseImportanceJson(std::string_view json_text);
std::vector<RawPerfMeasurement> LoadImportance(const std::filesystem::path& path);
std::string ImportanceToJson(std::span<const RawPerfMeasurement> raw);

// importance = exp(perf_pruned - perf_original). When `required` is given,
// every required key must be measured exactly once and no other key may
// appear.
std::map<SegmentKey, double> BuildImportanceTable(
    std::span<const RawPerfMeasurement> raw,
    const std::vector<SegmentKey>* required = nullptr);

// Whole-layer removal measurements for the layer-pruning baseline:
// [{"layer", "perf_pruned", "perf_original"}, ...].
struct LayerPerfMeasurement {
  int layer = 0;
  double perf_pruned = 0.0;
  double perf_original = 0.0;
};

std::vector<LayerPerfMeasurement> ParseLayerImportanceJson(std::string_view json_text);
std::vector<LayerPerfMeasurement> LoadLayerImportance(const std::filesystem::path& path);
std::string LayerImportanceToJson(std::span<const LayerPerfMeasurement> raw);

// importance[l - 1] = perf_original - perf_pruned, one entry per layer.
std::vector<double> BuildLayerImportance(std::span<const LayerPerfMeasurement> raw,
                                         int layer_count);

// Pairs a latency and an importance map after checking they cover the same
// admissible keys of `net`.
CostTables AssembleCostTables(const NetworkDescriptor& net,
                              std::map<SegmentKey, double> latency_ms,
                              std::map<SegmentKey, double> importance);

enum class ConstraintSense { kStrict, kInclusive };

// Latency budget T0 and the number of integer grid units P spanning it.
struct BudgetSpec {
  double t0_ms = 0.0;
  std::int64_t levels = 0;
  ConstraintSense sense = ConstraintSense::kStrict;

  // Largest admissible sum of discretized latencies.
  std::int64_t capacity() const {
    return sense == ConstraintSense::kStrict ? levels - 1 : levels;
  }
};

// floor(10 * T0) for T0 in milliseconds, at least 1.
std::int64_t DefaultDiscretization(double t0_ms);

// floor(t * P / T0), never rounding up: result * T0 / P <= t.
std::int64_t DiscretizeLatency(double latency_ms, double t0_ms, std::int64_t levels);

struct DiscreteLatencies {
  std::map<SegmentKey, std::int64_t> units;
  std::int64_t budget_units = 0;
};

DiscreteLatencies Discretize(const std::map<SegmentKey, double>& latency_ms, double t0_ms,
                             std::int64_t levels);

}  // namespace depthforge

#endif  // DEPTHFORGE_COST_TABLES_HPP_
