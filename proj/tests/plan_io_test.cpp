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

#include <gtest/gtest.h>

#include <random>

#include "depthforge/error.hpp"
#include "depthforge/oracle.hpp"
#include "depthforge/plan_io.hpp"
#include "support/support.hpp"

namespace depthforge {
namespace {

MergePlan SamplePlan() {
  MergePlan plan;
  plan.objective = 1.25;
  plan.latency_units = 7;
  plan.budget_units = 10;
  plan.kept_activations = {2};
  plan.kept_convs = {1, 3};
  plan.segments = {{0, 2, 3, false}, {2, 3, 5, true}};
  return plan;
}

TEST(PlanIo, RoundTrip) {
  const MergePlan plan = SamplePlan();
  const std::string text = PlanToJson(plan);
  EXPECT_EQ(ParsePlan(text), plan);
  EXPECT_EQ(PlanToJson(ParsePlan(text)), text);
  EXPECT_LT(text.find("\"mode\""), text.find("\"objective\""));
  EXPECT_LT(text.find("\"kept_convs\""), text.find("\"segments\""));
  EXPECT_NE(text.find("\"layer-merge\""), std::string::npos);

  const auto dir = testing::FreshTempDir("plan_io");
  SavePlan(plan, dir / "plan.json");
  EXPECT_EQ(LoadPlan(dir / "plan.json"), plan);
}

TEST(PlanIo, LayerOnlyMode) {
  MergePlan plan = SamplePlan();
  plan.mode = PlanMode::kLayerOnly;
  EXPECT_EQ(ParsePlan(PlanToJson(plan)).mode, PlanMode::kLayerOnly);
  EXPECT_STREQ(PlanModeName(PlanMode::kLayerOnly), "layer-only");
}

TEST(PlanIo, DoublesRoundTripExactly) {
  MergePlan plan = SamplePlan();
  plan.objective = 0.1 + 0.2;
  EXPECT_EQ(ParsePlan(PlanToJson(plan)).objective, plan.objective);
}

TEST(PlanIo, SchemaErrors) {
  const auto code = [](std::string_view text) {
    try {
      ParsePlan(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code("{"), ErrorCode::kSchemaViolation);
  EXPECT_EQ(code("[]"), ErrorCode::kSchemaViolation);
  EXPECT_EQ(code(R"({"mode":"layer-merge"})"), ErrorCode::kSchemaViolation);
  std::string text = PlanToJson(SamplePlan());
  text.replace(text.find("layer-merge"), 11, "fancy");
  EXPECT_EQ(code(text), ErrorCode::kSchemaViolation);
  EXPECT_THROW(LoadPlan("/nonexistent/plan.json"), Error);
}

// Oracle ------------------------------------------------------------------

TEST(Oracle, SingleLayer) {
  const std::vector<int> sizes{5};
  const NetworkDescriptor net = testing::ChainNet(sizes);
  std::mt19937_64 rng(1);
  const CostTables tables = testing::RandomTables(rng, net, 1.0);
  const oracle::OracleResult r =
      oracle::BruteForcePlan(tables, {5.0, 50, ConstraintSense::kStrict}, net);
  ASSERT_TRUE(r.feasible);
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_TRUE(r.activations.empty());
  // C = {} and C = {1}.
  EXPECT_EQ(r.explored, 2u);
}

TEST(Oracle, ExploresAllConfigurations) {
  const std::vector<int> sizes{3, 3, 3};
  const NetworkDescriptor net = testing::ChainNet(sizes, {2});
  std::mt19937_64 rng(2);
  const CostTables tables = testing::RandomTables(rng, net, 1.0);
  const oracle::OracleResult r =
      oracle::BruteForcePlan(tables, {5.0, 50, ConstraintSense::kStrict}, net);
  // 4 activation sets times 4 conv sets containing layer 2.
  EXPECT_EQ(r.explored, 16u);
}

TEST(Oracle, GuardsSizes) {
  const std::vector<int> sizes(oracle::kMaxPlanLayers + 1, 3);
  const NetworkDescriptor net = testing::ChainNet(sizes);
  std::mt19937_64 rng(3);
  const CostTables tables = testing::RandomTables(rng, net, 0.1);
  EXPECT_THROW(oracle::BruteForcePlan(tables, {5.0, 50, ConstraintSense::kStrict}, net),
               Error);
  const std::vector<int> wide(oracle::kMaxKeepSetSpan + 1, 3);
  EXPECT_THROW(oracle::BruteForceKeepSet(0, static_cast<int>(wide.size()), 3,
                                         testing::ChainNet(wide)),
               Error);
  const std::vector<double> values(oracle::kMaxKnapsackItems + 1, 1.0);
  const std::vector<std::int64_t> costs(values.size(), 1);
  EXPECT_THROW(oracle::BruteForceKnapsack(values, costs, 3), Error);
}

TEST(Oracle, KnapsackWitness) {
  const std::vector<double> values{3, 1, 4, 2};
  const std::vector<std::int64_t> costs{2, 1, 3, 2};
  const oracle::OracleResult r = oracle::BruteForceKnapsack(values, costs, 5);
  EXPECT_EQ(r.objective, 7.0);
  EXPECT_EQ(r.convs, (std::vector<int>{1, 3}));
  EXPECT_EQ(r.explored, 16u);
  const bool forced[] = {false, true, false, false};
  EXPECT_EQ(oracle::BruteForceKnapsack(values, costs, 5, forced).objective, 6.0);
  EXPECT_FALSE(oracle::BruteForceKnapsack(values, costs, 0, forced).feasible);
}

TEST(Oracle, KeepSetWitness) {
  const std::vector<int> sizes{3, 3, 5};
  const NetworkDescriptor net = testing::ChainNet(sizes, {}, {}, {}, {0.5, 2.0, 1.0});
  const oracle::OracleResult r = oracle::BruteForceKeepSet(0, 3, 5, net);
  ASSERT_TRUE(r.feasible);
  // {3} (1.0) loses to {1, 2} (2.5).
  EXPECT_EQ(r.convs, (std::vector<int>{1, 2}));
  EXPECT_EQ(r.objective, 2.5);
}

}  // namespace
}  // namespace depthforge
