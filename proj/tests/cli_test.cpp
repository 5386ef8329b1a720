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

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "cli.hpp"
#include "depthforge/kernel_io.hpp"
#include "depthforge/plan_io.hpp"
#include "support/support.hpp"

namespace depthforge {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome RunCli(std::vector<std::string> args) {
  args.insert(args.begin(), "depthforge");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Fixture(const std::string& name) {
  return (testing::SourceRoot() / "testdata" / "six_layer" / name).string();
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> PlanArgs() {
  return {"plan", "--net", Fixture("net.json"), "--analytic", Fixture("analytic.json"),
          "--importance", Fixture("importance.json"), "--budget-pct", "60"};
}

TEST(Cli, PlanMatchesGolden) {
  const Outcome first = RunCli(PlanArgs());
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(first.out, ReadText(Fixture("plan_60pct.json")));
  EXPECT_EQ(RunCli(PlanArgs()).out, first.out);
}

TEST(Cli, VerifyAcceptsGoldenAndRejectsTampering) {
  std::vector<std::string> args{"verify", "--net", Fixture("net.json"), "--analytic",
                                Fixture("analytic.json"), "--importance",
                                Fixture("importance.json"), "--budget-pct", "60", "--oracle"};
  auto golden = args;
  golden.insert(golden.end(), {"--plan", Fixture("plan_60pct.json")});
  const Outcome ok = RunCli(golden);
  ASSERT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_TRUE(nlohmann::json::parse(ok.out)["oracle"]["match"].get<bool>());

  MergePlan plan = LoadPlan(Fixture("plan_60pct.json"));
  plan.kept_convs.erase(plan.kept_convs.begin());
  const fs::path dir = testing::FreshTempDir("cli_verify");
  SavePlan(plan, dir / "tampered.json");
  auto tampered = args;
  tampered.insert(tampered.end(), {"--plan", (dir / "tampered.json").string()});
  const Outcome bad = RunCli(tampered);
  EXPECT_EQ(bad.code, 1);
  const auto report = nlohmann::json::parse(bad.out);
  EXPECT_FALSE(report["ok"].get<bool>());
  EXPECT_FALSE(report["violations"].empty());
}

TEST(Cli, LayerOnlyPlan) {
  auto args = PlanArgs();
  args[6] = Fixture("layer_importance.json");
  args.insert(args.end(), {"--mode", "layer-only"});
  const Outcome result = RunCli(args);
  ASSERT_EQ(result.code, 0) << result.err;
  const MergePlan plan = ParsePlan(result.out);
  EXPECT_EQ(plan.mode, PlanMode::kLayerOnly);
  for (int r : {1, 4}) EXPECT_NE(std::ranges::find(plan.kept_convs, r), plan.kept_convs.end());
}

TEST(Cli, MergeTwoThreeByThreeIntoFiveByFive) {
  const fs::path dir = testing::FreshTempDir("cli_merge");
  std::ofstream(dir / "net.json") << R"({"name": "pair", "layers": [
    {"index": 1, "kind": "standard-conv", "kernel_size": 3, "stride": 1, "in_channels": 4,
     "out_channels": 4, "groups": 1, "has_activation_after": true},
    {"index": 2, "kind": "standard-conv", "kernel_size": 3, "stride": 1, "in_channels": 4,
     "out_channels": 4, "groups": 1, "has_activation_after": false}],
    "irreducible": []})";
  MergePlan plan;
  plan.kept_convs = {1, 2};
  plan.segments = {{0, 2, 5, false}};
  SavePlan(plan, dir / "plan.json");
  fs::create_directories(dir / "weights");
  std::mt19937_64 rng(3);
  for (int l = 1; l <= 2; ++l) {
    WriteKernel(dir / "weights" / ("layer_" + std::to_string(l) + ".bin"),
                testing::RandomKernel(rng, 4, 4, 3, 1, 1));
  }
  const Outcome result =
      RunCli({"merge", "--net", (dir / "net.json").string(), "--plan",
              (dir / "plan.json").string(), "--weights", (dir / "weights").string(), "--out",
              (dir / "merged").string()});
  ASSERT_EQ(result.code, 0) << result.err;
  const auto manifest = nlohmann::json::parse(ReadText(dir / "merged" / "merged.json"));
  ASSERT_EQ(manifest.size(), 1u);
  EXPECT_EQ(manifest[0]["kernel_size"], 5);
  EXPECT_EQ(ReadKernel(dir / "merged" / "segment_1.bin").kernel_size(), 5);
}

TEST(Cli, GenTablesWritesArtifacts) {
  const fs::path dir = testing::FreshTempDir("cli_gen");
  const Outcome result = RunCli({"gen-tables", "--net", Fixture("net.json"), "--analytic",
                                 Fixture("analytic.json"), "--seed", "7", "--out",
                                 dir.string()});
  ASSERT_EQ(result.code, 0) << result.err;
  for (const char* name : {"latency.csv", "kernel_sizes.json", "requests.json",
                           "importance.json", "layer_importance.json"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  EXPECT_EQ(ReadText(dir / "importance.json"), ReadText(Fixture("importance.json")));
  const auto sizes = nlohmann::json::parse(ReadText(dir / "kernel_sizes.json"));
  EXPECT_EQ(sizes["layer_count"], 6);
}

TEST(Cli, SweepReportsEveryBudget) {
  auto args = PlanArgs();
  args[0] = "sweep";
  args.resize(7);
  args.insert(args.end(), {"--budgets-pct", "1,60,100"});
  const Outcome result = RunCli(args);
  ASSERT_EQ(result.code, 0) << result.err;
  std::istringstream lines(result.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("budget_ms,", 0), 0u);
  EXPECT_NE(rows[1].find(",0,,,"), std::string::npos);
  EXPECT_NE(rows[2].find(",1,5.876993721784381,107,"), std::string::npos) << rows[2];
}

TEST(Cli, ErrorsAreJsonOnStderr) {
  const Outcome missing = RunCli({"plan", "--net", "/nonexistent.json", "--budget-ms", "1"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(missing.out.empty());
  const auto report = nlohmann::json::parse(missing.err);
  EXPECT_TRUE(report.contains("error"));
  EXPECT_TRUE(report.contains("message"));

  auto both = PlanArgs();
  both.insert(both.end(), {"--budget-ms", "1"});
  EXPECT_EQ(RunCli(both).code, 2);

  auto infeasible = PlanArgs();
  infeasible.back() = "1";
  const Outcome tight = RunCli(infeasible);
  EXPECT_EQ(tight.code, 2);
  EXPECT_EQ(nlohmann::json::parse(tight.err)["error"], "infeasible_budget");

  EXPECT_EQ(RunCli({"bogus"}).code, 2);
}

TEST(Cli, RejectsBadThreadCap) {
  ::setenv("DEPTHFORGE_THREADS", "zero", 1);
  const Outcome bad = RunCli(PlanArgs());
  ::unsetenv("DEPTHFORGE_THREADS");
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(nlohmann::json::parse(bad.err)["error"], "invalid_argument");
  ::setenv("DEPTHFORGE_THREADS", "1", 1);
  const Outcome one = RunCli(PlanArgs());
  ::unsetenv("DEPTHFORGE_THREADS");
  EXPECT_EQ(one.out, ReadText(Fixture("plan_60pct.json")));
}

}  // namespace
}  // namespace depthforge
