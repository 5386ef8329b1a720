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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "depthforge/cost_tables.hpp"
#include "depthforge/error.hpp"
#include "depthforge/kernel_io.hpp"
#include "depthforge/latency_provider.hpp"
#include "depthforge/materialize.hpp"
#include "depthforge/network.hpp"
#include "depthforge/oracle.hpp"
#include "depthforge/plan_io.hpp"
#include "depthforge/planner.hpp"
#include "json.hpp"

namespace depthforge::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kEquivalenceTolerance = 1e-5;
constexpr double kSyntheticPerfOriginal = 0.75;

struct Options {
  std::string net;
  std::string latency;
  std::string analytic;
  std::string importance;
  std::string plan;
  std::string weights;
  std::string out;
  std::optional<double> budget_ms;
  std::optional<double> budget_pct;
  std::optional<std::int64_t> disc;
  std::string sense = "strict";
  std::string mode = "merge";
  std::optional<std::uint64_t> seed;
  std::vector<double> budgets_ms;
  std::vector<double> budgets_pct;
  bool oracle = false;
};

std::string FormatDouble(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

int TableThreads() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("DEPTHFORGE_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("DEPTHFORGE_THREADS must be a positive integer, got \"") + env +
                      "\"");
    }
    threads = static_cast<int>(std::min<long>(threads, cap));
  }
  return threads;
}

void Require(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
  }
}

std::unique_ptr<LatencyProvider> MakeProvider(const Options& opts) {
  if (!opts.latency.empty() && !opts.analytic.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--latency and --analytic are mutually exclusive");
  }
  if (!opts.latency.empty()) {
    return std::make_unique<TableLatencyProvider>(TableLatencyProvider::Load(opts.latency));
  }
  if (!opts.analytic.empty()) {
    return std::make_unique<AnalyticLatencyProvider>(AnalyticLatencyProvider::Load(opts.analytic));
  }
  throw Error(ErrorCode::kInvalidArgument, "one of --latency or --analytic is required");
}

ConstraintSense ParseSense(const std::string& text) {
  if (text == "strict") return ConstraintSense::kStrict;
  if (text == "inclusive") return ConstraintSense::kInclusive;
  throw Error(ErrorCode::kInvalidArgument, "--sense must be strict or inclusive");
}

bool LayerOnlyMode(const Options& opts) {
  if (opts.mode == "merge" || opts.mode == "layer-merge") return false;
  if (opts.mode == "layer-only") return true;
  throw Error(ErrorCode::kInvalidArgument, "--mode must be merge or layer-only");
}

double OriginalLatencyMs(const NetworkDescriptor& net, const LatencyProvider& provider) {
  double total = 0.0;
  for (double t : SingleLayerLatencies(net, provider)) total += t;
  return total;
}

BudgetSpec MakeBudget(double t0_ms, const Options& opts) {
  if (!(t0_ms > 0.0) || !std::isfinite(t0_ms)) {
    throw Error(ErrorCode::kInvalidArgument, "latency budget must be a positive number of ms");
  }
  BudgetSpec budget;
  budget.t0_ms = t0_ms;
  budget.sense = ParseSense(opts.sense);
  budget.levels = opts.disc ? *opts.disc : DefaultDiscretization(t0_ms);
  if (budget.levels < 1) throw Error(ErrorCode::kInvalidArgument, "--disc must be >= 1");
  return budget;
}

BudgetSpec ResolveBudget(const Options& opts, const NetworkDescriptor& net,
                         const LatencyProvider& provider) {
  if (opts.budget_ms && opts.budget_pct) {
    throw Error(ErrorCode::kInvalidArgument, "--budget-ms and --budget-pct are mutually exclusive");
  }
  if (opts.budget_ms) return MakeBudget(*opts.budget_ms, opts);
  if (opts.budget_pct) {
    return MakeBudget(*opts.budget_pct / 100.0 * OriginalLatencyMs(net, provider), opts);
  }
  throw Error(ErrorCode::kInvalidArgument, "one of --budget-ms or --budget-pct is required");
}

CostTables LoadTables(const Options& opts, const NetworkDescriptor& net,
                      const LatencyProvider& provider) {
  Require(opts.importance, "--importance");
  const std::vector<SegmentKey> required = RequiredKeys(net);
  std::map<SegmentKey, double> latency = BuildLatencyTable(net, provider, TableThreads());
  const std::vector<RawPerfMeasurement> raw = LoadImportance(opts.importance);
  std::map<SegmentKey, double> importance = BuildImportanceTable(raw, &required);
  return AssembleCostTables(net, std::move(latency), std::move(importance));
}

struct LayerTables {
  std::vector<double> importance;
  std::vector<double> latency_ms;
};

LayerTables LoadLayerTables(const Options& opts, const NetworkDescriptor& net,
                            const LatencyProvider& provider) {
  Require(opts.importance, "--importance");
  return {BuildLayerImportance(LoadLayerImportance(opts.importance), net.layer_count()),
          SingleLayerLatencies(net, provider)};
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  file << text;
  if (!file) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void Emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    WriteFile(path, text);
  }
}

// --- gen-tables -----------------------------------------------------------

double SegmentNorm(const NetworkDescriptor& net, int i, int j, const std::vector<int>& keep) {
  double removed = 0.0;
  double total = 0.0;
  const std::set<int> kept(keep.begin(), keep.end());
  for (int l = i + 1; l <= j; ++l) {
    const double norm = net.layer(l).l1_norm.value_or(1.0);
    total += norm;
    if (!kept.contains(l)) removed += norm;
  }
  return total > 0.0 ? removed / total : 0.0;
}

int GenTables(const Options& opts, std::ostream& out) {
  Require(opts.net, "--net");
  Require(opts.out, "--out");
  const NetworkDescriptor net = LoadNetwork(opts.net);
  const fs::path dir(opts.out);
  fs::create_directories(dir);
  const std::vector<SegmentKey> keys = RequiredKeys(net);

  std::map<SegmentKey, double> latency;
  if (!opts.analytic.empty() || !opts.latency.empty()) {
    latency = BuildLatencyTable(net, *MakeProvider(opts), TableThreads());
  }
  std::string csv = "i,j,k,depthwise,latency_ms\n";
  for (const SegmentKey& key : keys) {
    csv += std::to_string(key.start) + "," + std::to_string(key.end) + "," +
           std::to_string(key.kernel_size) + "," + (key.depthwise ? "1" : "0") + ",";
    if (auto it = latency.find(key); it != latency.end()) csv += FormatDouble(it->second);
    csv += "\n";
  }
  WriteFile(dir / "latency.csv", csv);

  ordered_json sizes;
  sizes["network"] = net.name();
  sizes["layer_count"] = net.layer_count();
  sizes["k0"] = net.k0();
  sizes["table_entries"] = keys.size();
  ordered_json segments = ordered_json::array();
  for (int i = 0; i < net.layer_count(); ++i) {
    for (int j = i + 1; j <= net.layer_count(); ++j) {
      if (!net.SegmentAllowed(i, j)) break;
      if (!net.SegmentRespectsSkipAdds(i, j)) continue;
      int bound = 1;
      for (int l = i + 1; l <= j; ++l) bound += net.layer(l).kernel_size - 1;
      ordered_json seg;
      seg["i"] = i;
      seg["j"] = j;
      seg["kernel_sizes"] = EnumerateKernelSizes(i, j, net);
      seg["bound"] = bound;
      ordered_json variants = ordered_json::array();
      for (const SizeVariant& v : EnumerateSizeVariants(i, j, net)) {
        variants.push_back({{"k", v.kernel_size}, {"depthwise", v.depthwise}});
      }
      seg["variants"] = std::move(variants);
      segments.push_back(std::move(seg));
    }
  }
  sizes["segments"] = std::move(segments);
  WriteFile(dir / "kernel_sizes.json", sizes.dump(2) + "\n");

  // Replaced networks to fine-tune externally, one per table key.
  ordered_json requests = ordered_json::array();
  std::vector<RawPerfMeasurement> synthetic;
  std::mt19937_64 rng(opts.seed.value_or(0));
  std::uniform_real_distribution<double> noise(0.0, 0.01);
  for (const SegmentKey& key : keys) {
    const KeepSetSolution keep =
        SolveKeepSet(key.start, key.end, key.kernel_size, net, key.depthwise);
    const ExtendedSets sets = ExtendSets(key.start, key.end, keep.keep, net.layer_count());
    ordered_json r;
    r["i"] = key.start;
    r["j"] = key.end;
    r["k"] = key.kernel_size;
    r["depthwise"] = key.depthwise;
    r["keep"] = keep.keep;
    r["kept_convs"] = sets.convs;
    r["kept_activations"] = sets.activations;
    requests.push_back(std::move(r));
    if (opts.seed) {
      const double drop = 0.01 * (key.end - key.start - 1) +
                          0.05 * SegmentNorm(net, key.start, key.end, keep.keep) + noise(rng);
      synthetic.push_back({key, kSyntheticPerfOriginal - drop, kSyntheticPerfOriginal});
    }
  }
  WriteFile(dir / "requests.json", requests.dump(2) + "\n");

  if (opts.seed) {
    WriteFile(dir / "importance.json", ImportanceToJson(synthetic));
    std::vector<LayerPerfMeasurement> layers;
    for (int l = 1; l <= net.layer_count(); ++l) {
      const double drop = 0.02 * SegmentNorm(net, l - 1, l, {}) + noise(rng);
      layers.push_back({l, kSyntheticPerfOriginal - drop, kSyntheticPerfOriginal});
    }
    WriteFile(dir / "layer_importance.json", LayerImportanceToJson(layers));
  }
  out << "wrote " << keys.size() << " table keys to " << dir.string() << "\n";
  return 0;
}

// --- plan / sweep -----------------------------------------------------------

int Plan(const Options& opts, std::ostream& out) {
  Require(opts.net, "--net");
  const NetworkDescriptor net = LoadNetwork(opts.net);
  const std::unique_ptr<LatencyProvider> provider = MakeProvider(opts);
  const BudgetSpec budget = ResolveBudget(opts, net, *provider);
  MergePlan plan;
  if (LayerOnlyMode(opts)) {
    const LayerTables tables = LoadLayerTables(opts, net, *provider);
    plan = SolveLayerOnly(tables.importance, tables.latency_ms, budget, net);
  } else {
    plan = Solve(LoadTables(opts, net, *provider), budget, net);
  }
  Emit(PlanToJson(plan), opts.out, out);
  return 0;
}

double PlanLatencyMs(const MergePlan& plan, const CostTables* tables,
                     const std::vector<double>* layer_latency) {
  double total = 0.0;
  if (tables != nullptr) {
    for (const PlanSegment& s : plan.segments) {
      total += tables->latency_ms.at({s.start, s.end, s.kernel_size, s.depthwise});
    }
  } else {
    for (int l : plan.kept_convs) total += (*layer_latency)[l - 1];
  }
  return total;
}

int Sweep(const Options& opts, std::ostream& out) {
  Require(opts.net, "--net");
  if (opts.budgets_ms.empty() == opts.budgets_pct.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "exactly one of --budgets-ms or --budgets-pct is required");
  }
  const NetworkDescriptor net = LoadNetwork(opts.net);
  const std::unique_ptr<LatencyProvider> provider = MakeProvider(opts);
  const double original_ms = OriginalLatencyMs(net, *provider);
  const bool layer_only = LayerOnlyMode(opts);
  std::optional<CostTables> tables;
  std::optional<LayerTables> layer_tables;
  if (layer_only) {
    layer_tables = LoadLayerTables(opts, net, *provider);
  } else {
    tables = LoadTables(opts, net, *provider);
  }

  std::vector<double> budgets = opts.budgets_ms;
  for (double pct : opts.budgets_pct) budgets.push_back(pct / 100.0 * original_ms);

  std::string csv = "budget_ms,budget_pct,budget_units,feasible,objective,latency_units,latency_ms\n";
  for (double t0 : budgets) {
    const BudgetSpec budget = MakeBudget(t0, opts);
    csv += FormatDouble(t0) + "," + FormatDouble(100.0 * t0 / original_ms) + "," +
           std::to_string(budget.levels) + ",";
    try {
      const MergePlan plan =
          layer_only ? SolveLayerOnly(layer_tables->importance, layer_tables->latency_ms, budget, net)
                     : Solve(*tables, budget, net);
      csv += "1," + FormatDouble(plan.objective) + "," + std::to_string(plan.latency_units) + "," +
             FormatDouble(PlanLatencyMs(plan, tables ? &*tables : nullptr,
                                        layer_tables ? &layer_tables->latency_ms : nullptr)) +
             "\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleBudget) throw;
      csv += "0,,,\n";
    }
  }
  Emit(csv, opts.out, out);
  return 0;
}

// --- merge / verify ---------------------------------------------------------

std::vector<KernelTensor> LoadLayerKernels(const NetworkDescriptor& net, const fs::path& dir) {
  std::vector<KernelTensor> kernels;
  std::vector<std::optional<BatchNormParams>> norms;
  for (int l = 1; l <= net.layer_count(); ++l) {
    kernels.push_back(ReadKernel(dir / ("layer_" + std::to_string(l) + ".bin")));
    const fs::path bn = dir / ("bn_" + std::to_string(l) + ".json");
    norms.push_back(fs::exists(bn) ? std::optional(ReadBatchNorm(bn)) : std::nullopt);
  }
  return PrepareLayerKernels(net, std::move(kernels), norms);
}

int Merge(const Options& opts, std::ostream& out) {
  Require(opts.net, "--net");
  Require(opts.plan, "--plan");
  Require(opts.weights, "--weights");
  Require(opts.out, "--out");
  const NetworkDescriptor net = LoadNetwork(opts.net);
  const MergePlan plan = LoadPlan(opts.plan);
  const std::vector<KernelTensor> kernels = LoadLayerKernels(net, opts.weights);
  const std::vector<KernelTensor> merged = MaterializePlan(net, plan, kernels);
  const fs::path dir(opts.out);
  fs::create_directories(dir);
  ordered_json manifest = ordered_json::array();
  for (std::size_t s = 0; s < merged.size(); ++s) {
    const std::string name = "segment_" + std::to_string(s + 1) + ".bin";
    WriteKernel(dir / name, merged[s]);
    manifest.push_back({{"start", plan.segments[s].start},
                        {"end", plan.segments[s].end},
                        {"kernel_size", merged[s].kernel_size()},
                        {"stride", merged[s].stride()},
                        {"groups", merged[s].groups()},
                        {"blob", name}});
  }
  WriteFile(dir / "merged.json", manifest.dump(2) + "\n");
  out << "wrote " << merged.size() << " merged kernels to " << dir.string() << "\n";
  return 0;
}

int Verify(const Options& opts, std::ostream& out) {
  Require(opts.net, "--net");
  Require(opts.plan, "--plan");
  const NetworkDescriptor net = LoadNetwork(opts.net);
  const MergePlan plan = LoadPlan(opts.plan);
  const std::unique_ptr<LatencyProvider> provider = MakeProvider(opts);
  const BudgetSpec budget = ResolveBudget(opts, net, *provider);

  ordered_json report;
  ValidationReport validation;
  std::optional<CostTables> tables;
  std::optional<LayerTables> layer_tables;
  if (plan.mode == PlanMode::kLayerOnly) {
    layer_tables = LoadLayerTables(opts, net, *provider);
    validation = ValidateLayerOnlyPlan(plan, layer_tables->importance, layer_tables->latency_ms,
                                       budget, net);
  } else {
    tables = LoadTables(opts, net, *provider);
    validation = ValidatePlan(plan, *tables, budget, net);
  }
  bool ok = validation.ok();
  report["violations"] = validation.violations;

  if (!opts.weights.empty() && validation.ok()) {
    const std::vector<KernelTensor> kernels = LoadLayerKernels(net, opts.weights);
    const std::set<int> kept(plan.kept_convs.begin(), plan.kept_convs.end());
    std::mt19937_64 rng(opts.seed.value_or(0));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ordered_json segments = ordered_json::array();
    for (const PlanSegment& seg : plan.segments) {
      const KernelTensor merged = MaterializeSegment(net, seg, kept, kernels);
      const int extent = merged.kernel_size() + 2 * merged.stride();
      FeatureMap x(net.layer(seg.start + 1).in_channels, extent, extent);
      for (double& v : x.data()) v = dist(rng);
      const double error = MaxRelativeError(
          ConvReference(x, merged, 0), EvaluateSegmentSequential(x, net, seg, kept, kernels));
      ok = ok && error <= kEquivalenceTolerance;
      segments.push_back({{"start", seg.start},
                          {"end", seg.end},
                          {"max_relative_error", error},
                          {"pass", error <= kEquivalenceTolerance}});
    }
    report["equivalence"] = std::move(segments);
  }

  if (opts.oracle) {
    ordered_json check;
    if (tables) {
      const oracle::OracleResult best = oracle::BruteForcePlan(*tables, budget, net);
      check["feasible"] = best.feasible;
      check["objective"] = best.objective;
      check["explored"] = best.explored;
      check["match"] = best.feasible && best.objective == plan.objective;
    } else {
      const auto n = static_cast<std::size_t>(net.layer_count());
      std::vector<std::int64_t> costs;
      const auto forced = std::make_unique<bool[]>(n);
      for (std::size_t t = 0; t < n; ++t) {
        costs.push_back(
            DiscretizeLatency(layer_tables->latency_ms[t], budget.t0_ms, budget.levels));
        forced[t] = !net.removable(static_cast<int>(t) + 1);
      }
      const oracle::OracleResult best = oracle::BruteForceKnapsack(
          layer_tables->importance, costs, budget.capacity(), std::span<const bool>(forced.get(), n));
      check["feasible"] = best.feasible;
      check["objective"] = best.objective;
      check["explored"] = best.explored;
      check["match"] = best.feasible && best.objective == plan.objective;
    }
    ok = ok && check["match"].get<bool>();
    report["oracle"] = std::move(check);
  }
  report["ok"] = ok;
  Emit(report.dump(2) + "\n", opts.out, out);
  return ok ? 0 : 1;
}

void ReportError(std::ostream& err, std::string_view code, const std::string& message) {
  ordered_json doc;
  doc["error"] = code;
  doc["message"] = message;
  err << doc.dump() << "\n";
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opts;
  CLI::App app{"Depth-compression planner for chain CNNs", "depthforge"};
  app.require_subcommand(1);

  auto add_common = [&opts](CLI::App* cmd) {
    cmd->add_option("--net", opts.net, "Network descriptor JSON");
    cmd->add_option("--latency", opts.latency, "Latency table CSV");
    cmd->add_option("--analytic", opts.analytic, "Analytic latency model config JSON");
    cmd->add_option("--importance", opts.importance, "Importance measurements JSON");
    cmd->add_option("--budget-ms", opts.budget_ms, "Latency budget in milliseconds");
    cmd->add_option("--budget-pct", opts.budget_pct,
                    "Latency budget as a percentage of the original latency");
    cmd->add_option("--disc", opts.disc, "Discretization level P");
    cmd->add_option("--sense", opts.sense, "Budget constraint: strict or inclusive")
        ->check(CLI::IsMember({"strict", "inclusive"}));
    cmd->add_option("--mode", opts.mode, "merge or layer-only")
        ->check(CLI::IsMember({"merge", "layer-merge", "layer-only"}));
    cmd->add_option("--out", opts.out, "Output path");
    cmd->add_option("--seed", opts.seed, "Seed for synthetic data and random inputs");
  };

  CLI::App* gen = app.add_subcommand("gen-tables", "Enumerate table keys and kernel sizes");
  CLI::App* plan = app.add_subcommand("plan", "Solve for a merge plan");
  CLI::App* merge = app.add_subcommand("merge", "Merge layer kernels according to a plan");
  CLI::App* verify = app.add_subcommand("verify", "Validate a plan and its merged kernels");
  CLI::App* sweep = app.add_subcommand("sweep", "Plan across a list of budgets");
  for (CLI::App* cmd : {gen, plan, merge, verify, sweep}) add_common(cmd);
  for (CLI::App* cmd : {merge, verify}) {
    cmd->add_option("--plan", opts.plan, "Plan JSON");
    cmd->add_option("--weights", opts.weights, "Directory of layer_<l>.bin kernels");
  }
  verify->add_flag("--oracle", opts.oracle, "Cross-check against exhaustive search")
      ->group("");
  sweep->add_option("--budgets-ms", opts.budgets_ms, "Budgets in milliseconds")->delimiter(',');
  sweep->add_option("--budgets-pct", opts.budgets_pct, "Budgets in percent")->delimiter(',');

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    ReportError(err, ErrorCodeName(ErrorCode::kInvalidArgument), e.what());
    return 2;
  }

  try {
    if (gen->parsed()) return GenTables(opts, out);
    if (plan->parsed()) return Plan(opts, out);
    if (merge->parsed()) return Merge(opts, out);
    if (verify->parsed()) return Verify(opts, out);
    return Sweep(opts, out);
  } catch (const Error& e) {
    ReportError(err, ErrorCodeName(e.code()), e.what());
  } catch (const fs::filesystem_error& e) {
    ReportError(err, ErrorCodeName(ErrorCode::kIo), e.what());
  } catch (const std::exception& e) {
    ReportError(err, "internal", e.what());
  }
  return 2;
}

}  // namespace depthforge::cli
