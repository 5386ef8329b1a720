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

#include "depthforge/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "depthforge/error.hpp"
#include "depthforge/keep_set.hpp"

namespace depthforge {
namespace {

constexpr double kUnreachable = -std::numeric_limits<double>::infinity();

struct Candidate {
  int start;
  int kernel_size;
  bool depthwise;
  std::int64_t units;
  double importance;
};

// Candidates grouped by segment end, ordered by (start, kernel size,
// depthwise=false first). That order is the argmax tie-break.
std::vector<std::vector<Candidate>> CandidatesByEnd(const CostTables& tables,
                                                    const BudgetSpec& budget,
                                                    const NetworkDescriptor& net) {
  if (tables.layer_count != net.layer_count()) {
    throw Error(ErrorCode::kInvalidArgument, "cost tables were built for a different network");
  }
  if (!(budget.t0_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "latency budget must be positive");
  }
  std::vector<std::vector<Candidate>> by_end(net.layer_count() + 1);
  for (const auto& [key, latency] : tables.latency_ms) {
    if (key.start < 0 || key.end > net.layer_count() || key.start >= key.end) {
      throw Error(ErrorCode::kIndexOutOfRange, "table key out of range: " + ToString(key));
    }
    if (!net.SegmentAdmissible(key.start, key.end)) continue;
    auto it = tables.importance.find(key);
    if (it == tables.importance.end()) {
      throw Error(ErrorCode::kMissingKey, "importance table has no entry for " + ToString(key));
    }
    const std::int64_t units =
        budget.levels >= 1 ? DiscretizeLatency(latency, budget.t0_ms, budget.levels) : 0;
    by_end[key.end].push_back({key.start, key.kernel_size, key.depthwise, units, it->second});
  }
  for (int l = 1; l <= net.layer_count(); ++l) {
    if (by_end[l].empty()) {
      throw Error(ErrorCode::kMissingKey,
                  "no table entry for segment (" + std::to_string(l - 1) + ", " +
                      std::to_string(l) + "]");
    }
  }
  return by_end;
}

std::int64_t MinimalUnits(const std::vector<std::vector<Candidate>>& by_end, int layers) {
  constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> least(layers + 1, kNone);
  least[0] = 0;
  for (int l = 1; l <= layers; ++l) {
    for (const Candidate& c : by_end[l]) {
      if (least[c.start] != kNone) least[l] = std::min(least[l], least[c.start] + c.units);
    }
  }
  return least[layers];
}

}  // namespace

std::int64_t MinimalLatencyUnits(const CostTables& tables, const BudgetSpec& budget,
                                 const NetworkDescriptor& net) {
  return MinimalUnits(CandidatesByEnd(tables, budget, net), net.layer_count());
}

MergePlan Solve(const CostTables& tables, const BudgetSpec& budget,
                const NetworkDescriptor& net, DPState* state) {
  const int layers = net.layer_count();
  const std::vector<std::vector<Candidate>> by_end = CandidatesByEnd(tables, budget, net);
  const std::int64_t capacity = budget.capacity();

  auto infeasible = [&]() -> Error {
    const std::int64_t least = MinimalUnits(by_end, layers);
    std::ostringstream message;
    message << "no plan fits the budget of " << budget.t0_ms << " ms (" << budget.levels
            << " units, capacity " << capacity << "); minimal achievable latency is " << least
            << " units (" << (budget.levels > 0 ? least * budget.t0_ms / budget.levels : 0.0)
            << " ms)";
    return Error(ErrorCode::kInfeasibleBudget, message.str());
  };
  if (capacity < 0) throw infeasible();

  const auto width = static_cast<std::size_t>(capacity + 1);
  std::vector<double> best((layers + 1) * width, kUnreachable);
  std::vector<int> choice((layers + 1) * width, -1);
  std::fill(best.begin(), best.begin() + width, 0.0);

  for (int l = 1; l <= layers; ++l) {
    double* row = best.data() + l * width;
    int* row_choice = choice.data() + l * width;
    const std::vector<Candidate>& candidates = by_end[l];
    for (std::size_t e = 0; e < candidates.size(); ++e) {
      const Candidate& cand = candidates[e];
      if (cand.units > capacity) continue;
      const double* prev = best.data() + cand.start * width;
      for (std::int64_t c = cand.units; c <= capacity; ++c) {
        const double base = prev[c - cand.units];
        if (base == kUnreachable) continue;
        const double value = base + cand.importance;
        if (value > row[c]) {
          row[c] = value;
          row_choice[c] = static_cast<int>(e);
        }
      }
    }
  }

  if (state != nullptr) {
    state->layer_count = layers;
    state->capacity = capacity;
    state->best = best;
  }
  if (best[layers * width + capacity] == kUnreachable) throw infeasible();

  MergePlan plan;
  plan.mode = PlanMode::kLayerMerge;
  plan.objective = best[layers * width + capacity];
  plan.budget_units = budget.levels;
  std::int64_t c = capacity;
  for (int l = layers; l > 0;) {
    const Candidate& cand = by_end[l][choice[l * width + c]];
    plan.segments.push_back({cand.start, l, cand.kernel_size, cand.depthwise});
    plan.latency_units += cand.units;
    c -= cand.units;
    l = cand.start;
  }
  std::reverse(plan.segments.begin(), plan.segments.end());

  for (const PlanSegment& seg : plan.segments) {
    if (seg.end < layers) plan.kept_activations.push_back(seg.end);
    const KeepSetSolution keep =
        SolveKeepSet(seg.start, seg.end, seg.kernel_size, net, seg.depthwise);
    plan.kept_convs.insert(plan.kept_convs.end(), keep.keep.begin(), keep.keep.end());
  }
  return plan;
}

MergePlan SolveLayerOnly(std::span<const double> layer_importance,
                         std::span<const double> layer_latency_ms, const BudgetSpec& budget,
                         const NetworkDescriptor& net) {
  const int layers = net.layer_count();
  if (layer_importance.size() != static_cast<std::size_t>(layers) ||
      layer_latency_ms.size() != static_cast<std::size_t>(layers)) {
    throw Error(ErrorCode::kMissingKey, "per-layer importance and latency must cover every layer");
  }
  for (int t = 0; t < layers; ++t) {
    if (!std::isfinite(layer_importance[t])) {
      throw Error(ErrorCode::kNonFinite, "importance of layer " + std::to_string(t + 1));
    }
  }
  const std::int64_t capacity = budget.capacity();
  std::vector<std::int64_t> units(layers);
  std::int64_t forced_units = 0;
  for (int t = 0; t < layers; ++t) {
    units[t] = budget.levels >= 1
                   ? DiscretizeLatency(layer_latency_ms[t], budget.t0_ms, budget.levels)
                   : 0;
    if (!net.removable(t + 1)) forced_units += units[t];
  }
  if (capacity < 0 || forced_units > capacity) {
    throw Error(ErrorCode::kInfeasibleBudget,
                "irreducible layers alone need " + std::to_string(forced_units) +
                    " units, budget capacity is " + std::to_string(capacity));
  }

  const auto width = static_cast<std::size_t>(capacity + 1);
  // best[t][c]: items 1..t, total units <= c.
  std::vector<double> best((layers + 1) * width, kUnreachable);
  std::vector<char> taken((layers + 1) * width, 0);
  std::fill(best.begin(), best.begin() + width, 0.0);
  for (int t = 1; t <= layers; ++t) {
    const bool forced = !net.removable(t);
    const std::int64_t u = units[t - 1];
    const double v = layer_importance[t - 1];
    const double* prev = best.data() + (t - 1) * width;
    double* row = best.data() + t * width;
    char* row_taken = taken.data() + t * width;
    for (std::int64_t c = 0; c <= capacity; ++c) {
      if (!forced) row[c] = prev[c];
      if (c >= u && prev[c - u] != kUnreachable) {
        const double with = prev[c - u] + v;
        if (forced || with > row[c]) {
          row[c] = with;
          row_taken[c] = 1;
        }
      }
    }
  }
  if (best[layers * width + capacity] == kUnreachable) {
    throw Error(ErrorCode::kInfeasibleBudget, "no layer subset fits the budget");
  }

  MergePlan plan;
  plan.mode = PlanMode::kLayerOnly;
  plan.objective = best[layers * width + capacity];
  plan.budget_units = budget.levels;
  std::vector<bool> kept(layers + 1, false);
  std::int64_t c = capacity;
  for (int t = layers; t >= 1; --t) {
    if (taken[t * width + c]) {
      kept[t] = true;
      c -= units[t - 1];
      plan.latency_units += units[t - 1];
    }
  }
  for (int l = 1; l <= layers; ++l) {
    const LayerDescriptor& layer = net.layer(l);
    if (kept[l]) {
      plan.kept_convs.push_back(l);
      if (l < layers && layer.has_activation_after) plan.kept_activations.push_back(l);
      plan.segments.push_back({l - 1, l, layer.kernel_size, layer.depthwise()});
    } else {
      plan.segments.push_back({l - 1, l, 1, true});
    }
  }
  return plan;
}

namespace {

std::string Range(int i, int j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + "]";
}

// Checks shared by both plan modes: partition, conv keep set, per-segment
// kernel size and depthwise flag.
void CheckStructure(const MergePlan& plan, const NetworkDescriptor& net,
                    std::vector<std::string>& out) {
  const int layers = net.layer_count();
  if (plan.segments.empty()) {
    out.push_back("plan has no segments");
    return;
  }
  int cursor = 0;
  for (const PlanSegment& seg : plan.segments) {
    if (seg.start != cursor || seg.end <= seg.start) {
      out.push_back("segments do not partition (0, L]: found " + Range(seg.start, seg.end) +
                    " after boundary " + std::to_string(cursor));
      return;
    }
    cursor = seg.end;
  }
  if (cursor != layers) {
    out.push_back("segments end at " + std::to_string(cursor) + ", expected " +
                  std::to_string(layers));
    return;
  }

  std::set<int> kept;
  for (int l : plan.kept_convs) {
    if (l < 1 || l > layers) {
      out.push_back("kept conv index " + std::to_string(l) + " out of range");
      return;
    }
    kept.insert(l);
  }
  if (!std::is_sorted(plan.kept_convs.begin(), plan.kept_convs.end()) ||
      kept.size() != plan.kept_convs.size()) {
    out.push_back("kept_convs must be sorted and unique");
  }
  for (int r : net.irreducible()) {
    if (!kept.contains(r)) {
      out.push_back("irreducible layer " + std::to_string(r) + " is missing from kept_convs");
    }
  }
  for (int l = 1; l <= layers; ++l) {
    if (!kept.contains(l) && !net.removable(l) && !net.is_irreducible(l)) {
      out.push_back("layer " + std::to_string(l) + " cannot be replaced by identity");
    }
  }
  for (const PlanSegment& seg : plan.segments) {
    int k = 1;
    bool all_depthwise = true;
    for (int l = seg.start + 1; l <= seg.end; ++l) {
      if (!kept.contains(l)) continue;
      k += net.layer(l).kernel_size - 1;
      all_depthwise = all_depthwise && net.layer(l).depthwise();
    }
    if (k != seg.kernel_size) {
      out.push_back("segment " + Range(seg.start, seg.end) + " declares kernel size " +
                    std::to_string(seg.kernel_size) + " but its kept layers give " +
                    std::to_string(k));
    }
    if (all_depthwise != seg.depthwise) {
      out.push_back("segment " + Range(seg.start, seg.end) + " has a wrong depthwise flag");
    }
  }
}

void CheckBudget(const MergePlan& plan, std::int64_t units, const BudgetSpec& budget,
                 std::vector<std::string>& out) {
  if (units != plan.latency_units) {
    out.push_back("latency_units " + std::to_string(plan.latency_units) +
                  " disagree with the recomputed " + std::to_string(units));
  }
  if (plan.budget_units != budget.levels) {
    out.push_back("budget_units " + std::to_string(plan.budget_units) + " disagree with P = " +
                  std::to_string(budget.levels));
  }
  if (units > budget.capacity()) {
    out.push_back("latency " + std::to_string(units) + " units exceeds the capacity of " +
                  std::to_string(budget.capacity()));
  }
}

}  // namespace

ValidationReport ValidatePlan(const MergePlan& plan, const CostTables& tables,
                              const BudgetSpec& budget, const NetworkDescriptor& net) {
  ValidationReport report;
  std::vector<std::string>& out = report.violations;
  if (plan.mode != PlanMode::kLayerMerge) out.push_back("plan mode is not layer-merge");
  CheckStructure(plan, net, out);
  if (!out.empty()) return report;

  std::vector<int> boundaries;
  for (const PlanSegment& seg : plan.segments) {
    if (seg.end < net.layer_count()) boundaries.push_back(seg.end);
  }
  if (boundaries != plan.kept_activations) {
    out.push_back("kept_activations differ from the segment boundaries");
  }

  const std::set<int> kept(plan.kept_convs.begin(), plan.kept_convs.end());
  double objective = 0.0;
  std::int64_t units = 0;
  for (const PlanSegment& seg : plan.segments) {
    const std::string range = Range(seg.start, seg.end);
    if (std::optional<int> b = net.FirstBarrierInside(seg.start, seg.end)) {
      out.push_back("segment " + range + " crosses barrier " + std::to_string(*b));
      continue;
    }
    if (std::optional<SkipAddSpan> span = net.FirstCrossedSpan(seg.start, seg.end)) {
      out.push_back("segment " + range + " cuts skip-addition span " +
                    Range(span->start, span->end));
      continue;
    }
    const SegmentKey key{seg.start, seg.end, seg.kernel_size, seg.depthwise};
    auto lat = tables.latency_ms.find(key);
    auto imp = tables.importance.find(key);
    if (lat == tables.latency_ms.end() || imp == tables.importance.end()) {
      out.push_back("no table entry for " + ToString(key));
      continue;
    }
    objective = objective + imp->second;
    units += DiscretizeLatency(lat->second, budget.t0_ms, budget.levels);

    std::vector<int> segment_keep;
    for (int l = seg.start + 1; l <= seg.end; ++l) {
      if (kept.contains(l)) segment_keep.push_back(l);
    }
    try {
      const KeepSetSolution best =
          SolveKeepSet(seg.start, seg.end, seg.kernel_size, net, seg.depthwise);
      if (best.keep != segment_keep) {
        out.push_back("kept convs of segment " + range +
                      " differ from its l1-optimal keep set");
      }
    } catch (const Error& e) {
      out.push_back("segment " + range + ": " + e.what());
    }
  }
  if (!out.empty()) return report;
  if (objective != plan.objective) {
    std::ostringstream message;
    message.precision(17);
    message << "objective " << plan.objective << " disagrees with the recomputed "
            << objective;
    out.push_back(message.str());
  }
  CheckBudget(plan, units, budget, out);
  return report;
}

ValidationReport ValidateLayerOnlyPlan(const MergePlan& plan,
                                       std::span<const double> layer_importance,
                                       std::span<const double> layer_latency_ms,
                                       const BudgetSpec& budget, const NetworkDescriptor& net) {
  ValidationReport report;
  std::vector<std::string>& out = report.violations;
  if (plan.mode != PlanMode::kLayerOnly) out.push_back("plan mode is not layer-only");
  CheckStructure(plan, net, out);
  if (!out.empty()) return report;
  if (layer_importance.size() != static_cast<std::size_t>(net.layer_count()) ||
      layer_latency_ms.size() != static_cast<std::size_t>(net.layer_count())) {
    out.push_back("per-layer tables do not cover every layer");
    return report;
  }
  for (const PlanSegment& seg : plan.segments) {
    if (seg.end - seg.start != 1) {
      out.push_back("layer-only plans cannot merge: segment " + Range(seg.start, seg.end));
    }
  }
  std::vector<int> activations;
  double objective = 0.0;
  std::int64_t units = 0;
  for (int l : plan.kept_convs) {
    objective = objective + layer_importance[l - 1];
    units += DiscretizeLatency(layer_latency_ms[l - 1], budget.t0_ms, budget.levels);
    if (l < net.layer_count() && net.layer(l).has_activation_after) activations.push_back(l);
  }
  if (activations != plan.kept_activations) {
    out.push_back("kept_activations differ from the activations of kept layers");
  }
  if (objective != plan.objective) out.push_back("objective disagrees with the recomputed sum");
  CheckBudget(plan, units, budget, out);
  return report;
}

}  // namespace depthforge
