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

#ifndef DEPTHFORGE_PLANNER_HPP_
#define DEPTHFORGE_PLANNER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "depthforge/cost_tables.hpp"
#include "depthforge/network.hpp"

namespace depthforge {

enum class PlanMode { kLayerMerge, kLayerOnly };

struct PlanSegment {
  int start = 0;  // segment (start, end]
  int end = 0;
  int kernel_size = 1;
  bool depthwise = false;

  bool operator==(const PlanSegment&) const = default;
};

// Solver output: the activations kept (segment boundaries), the convolutions
// kept, and one merged layer per segment.
struct MergePlan {
  PlanMode mode = PlanMode::kLayerMerge;
  std::vector<int> kept_activations;
  std::vector<int> kept_convs;
  std::vector<PlanSegment> segments;
  double objective = 0.0;
  std::int64_t latency_units = 0;
  std::int64_t budget_units = 0;

  bool operator==(const MergePlan&) const = default;
};

// Full DP table. best(l, c) is the largest importance sum over the first l
// layers with discretized latency at most c, or -infinity when unreachable.
struct DPState {
  int layer_count = 0;
  std::int64_t capacity = 0;
  std::vector<double> best;

  double value(int l, std::int64_t c) const {
    return best[static_cast<std::size_t>(l) * (capacity + 1) + c];
  }
};

// Exact optimum of the surrogate problem on the discretized instance.
// Throws kInfeasibleBudget (with the smallest achievable latency in the
// message) when no chain of segments fits the budget.
MergePlan Solve(const CostTables& tables, const BudgetSpec& budget,
                const NetworkDescriptor& net, DPState* state = nullptr);

// Smallest total discretized latency of any admissible plan.
std::int64_t MinimalLatencyUnits(const CostTables& tables, const BudgetSpec& budget,
                                 const NetworkDescriptor& net);

// 0-1 knapsack over whole-layer removal; irreducible layers are always kept.
// Both spans are indexed by layer - 1.
MergePlan SolveLayerOnly(std::span<const double> layer_importance,
                         std::span<const double> layer_latency_ms, const BudgetSpec& budget,
                         const NetworkDescriptor& net);

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport ValidatePlan(const MergePlan& plan, const CostTables& tables,
                              const BudgetSpec& budget, const NetworkDescriptor& net);

ValidationReport ValidateLayerOnlyPlan(const MergePlan& plan,
                                       std::span<const double> layer_importance,
                                       std::span<const double> layer_latency_ms,
                                       const BudgetSpec& budget, const NetworkDescriptor& net);

}  // namespace depthforge

#endif  // DEPTHFORGE_PLANNER_HPP_
