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

#ifndef DEPTHFORGE_ORACLE_HPP_
#define DEPTHFORGE_ORACLE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "depthforge/cost_tables.hpp"
#include "depthforge/network.hpp"
#include "depthforge/planner.hpp"

// Exhaustive reference solvers. They are exponential and guarded by small
// size limits; use them to cross-check the fast solvers on toy instances.
namespace depthforge::oracle {

inline constexpr int kMaxPlanLayers = 12;
inline constexpr int kMaxKeepSetSpan = 14;
inline constexpr int kMaxKnapsackItems = 20;

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
  // Witness. For plans: activations and convs kept plus the segments they
  // induce. For keep sets and knapsacks only `convs` is filled.
  std::vector<int> activations;
  std::vector<int> convs;
  std::vector<PlanSegment> segments;
  std::uint64_t explored = 0;  // configurations visited
};

// Enumerates every activation set A and every conv set C containing the
// layers that cannot become identities, looks the induced merged layers up
// in `tables` and keeps the best configuration that fits the budget.
OracleResult BruteForcePlan(const CostTables& tables, const BudgetSpec& budget,
                            const NetworkDescriptor& net);

// Largest l1 sum over keep sets of (i, j] with merged kernel size k.
OracleResult BruteForceKeepSet(int i, int j, int kernel_size, const NetworkDescriptor& net,
                               std::optional<bool> depthwise = std::nullopt);

// max sum(values[S]) s.t. sum(costs[S]) <= capacity and forced[t] => t in S.
// `forced` may be empty. Item t is reported as t + 1 in `convs`.
OracleResult BruteForceKnapsack(std::span<const double> values,
                                std::span<const std::int64_t> costs, std::int64_t capacity,
                                std::span<const bool> forced = {});

}  // namespace depthforge::oracle

#endif  // DEPTHFORGE_ORACLE_HPP_
