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

#include "depthforge/cost_tables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <string>
#include <thread>

#include "depthforge/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace depthforge {
namespace {

using nlohmann::json;

std::string RangeText(int i, int j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + "]";
}

KeepSetFrontier FrontierTo(int i, int j, const NetworkDescriptor& net) {
  if (!net.SegmentAllowed(i, j)) {
    throw Error(ErrorCode::kSegmentNotAllowed, "segment " + RangeText(i, j) +
                                                   " crosses a merge barrier");
  }
  KeepSetFrontier frontier(net, i);
  while (frontier.end() < j) frontier.Extend();
  return frontier;
}

// Keys and latencies of every admissible segment starting at `i`.
std::vector<std::pair<SegmentKey, double>> BuildRow(const NetworkDescriptor& net,
                                                    const LatencyProvider& provider, int i) {
  std::vector<std::pair<SegmentKey, double>> row;
  KeepSetFrontier frontier(net, i);
  for (int j = i + 1; j <= net.layer_count(); ++j) {
    frontier.Extend();
    if (!net.SegmentAllowed(i, j)) break;
    if (!net.SegmentRespectsSkipAdds(i, j)) continue;
    for (const SizeVariant& v : frontier.Variants()) {
      const SegmentKey key{i, j, v.kernel_size, v.depthwise};
      const KeepSetSolution keep = *frontier.Best(v.kernel_size, v.depthwise);
      row.emplace_back(key, provider.LatencyMs(MakeLatencyQuery(net, key, keep)));
    }
  }
  return row;
}

}  // namespace

std::set<int> EnumerateKernelSizes(int i, int j, const NetworkDescriptor& net) {
  return FrontierTo(i, j, net).KernelSizes();
}

std::vector<SizeVariant> EnumerateSizeVariants(int i, int j, const NetworkDescriptor& net) {
  return FrontierTo(i, j, net).Variants();
}

std::vector<SegmentKey> RequiredKeys(const NetworkDescriptor& net) {
  std::vector<SegmentKey> keys;
  for (int i = 0; i < net.layer_count(); ++i) {
    KeepSetFrontier frontier(net, i);
    for (int j = i + 1; j <= net.layer_count(); ++j) {
      frontier.Extend();
      if (!net.SegmentAllowed(i, j)) break;
      if (!net.SegmentRespectsSkipAdds(i, j)) continue;
      for (const SizeVariant& v : frontier.Variants()) {
        keys.push_back({i, j, v.kernel_size, v.depthwise});
      }
    }
  }
  return keys;
}

LatencyQuery MakeLatencyQuery(const NetworkDescriptor& net, const SegmentKey& key,
                              const KeepSetSolution& keep) {
  const LayerDescriptor& first = net.layer(key.start + 1);
  const LayerDescriptor& last = net.layer(key.end);
  LatencyQuery query;
  query.key = key;
  query.in_channels = first.in_channels;
  query.out_channels = last.out_channels;
  query.in_shape = first.in_shape;
  query.out_shape = last.out_shape;
  query.stride = 1;
  for (int l = key.start + 1; l <= key.end; ++l) query.stride *= net.layer(l).stride;
  query.identity = keep.keep.empty();
  if (query.identity) {
    query.groups = first.in_channels;
  } else {
    int groups = 0;
    for (int l : keep.keep) groups = std::gcd(groups, net.layer(l).groups);
    query.groups = groups;
  }
  return query;
}

std::map<SegmentKey, double> BuildLatencyTable(const NetworkDescriptor& net,
                                               const LatencyProvider& provider,
                                               int threads) {
  const int rows = net.layer_count();
  std::vector<std::vector<std::pair<SegmentKey, double>>> results(rows);
  std::vector<std::exception_ptr> failures(rows);
  std::atomic<int> next_row{0};
  auto worker = [&] {
    for (int i = next_row.fetch_add(1); i < rows; i = next_row.fetch_add(1)) {
      try {
        results[i] = BuildRow(net, provider, i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, rows);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  std::map<SegmentKey, double> table;
  for (auto& row : results) {
    for (auto& [key, latency] : row) {
      if (!std::isfinite(latency) || latency < 0.0) {
        throw Error(ErrorCode::kProviderFailure,
                    "provider returned an invalid latency for " + ToString(key));
      }
      table.emplace(key, latency);
    }
  }
  return table;
}

std::vector<double> SingleLayerLatencies(const NetworkDescriptor& net,
                                         const LatencyProvider& provider) {
  std::vector<double> latencies;
  latencies.reserve(net.layer_count());
  for (const LayerDescriptor& layer : net.layers()) {
    const SegmentKey key{layer.index - 1, layer.index, layer.kernel_size, layer.depthwise()};
    KeepSetSolution keep;
    keep.keep = {layer.index};
    keep.achieved_k = layer.kernel_size;
    keep.depthwise_result = layer.depthwise();
    latencies.push_back(provider.LatencyMs(MakeLatencyQuery(net, key, keep)));
  }
  return latencies;
}

std::vector<RawPerfMeasurement> ParseImportanceJson(std::string_view json_text) {
  std::vector<RawPerfMeasurement> raw;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_array()) {
      throw Error(ErrorCode::kSchemaViolation, "importance document must be an array");
    }
    for (const json& entry : doc) {
      RawPerfMeasurement m;
      m.key.start = entry.at("i").get<int>();
      m.key.end = entry.at("j").get<int>();
      m.key.kernel_size = entry.at("k").get<int>();
      const json& dw = entry.at("depthwise");
      m.key.depthwise = dw.is_boolean() ? dw.get<bool>() : dw.get<int>() != 0;
      m.perf_pruned = entry.at("perf_pruned").get<double>();
      m.perf_original = entry.at("perf_original").get<double>();
      raw.push_back(m);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("importance document: ") + e.what());
  }
  return raw;
}

std::vector<RawPerfMeasurement> LoadImportance(const std::filesystem::path& path) {
  return ParseImportanceJson(internal::ReadTextFile(path));
}

std::string ImportanceToJson(std::span<const RawPerfMeasurement> raw) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const RawPerfMeasurement& m : raw) {
    doc.push_back({{"i", m.key.start},
                   {"j", m.key.end},
                   {"k", m.key.kernel_size},
                   {"depthwise", m.key.depthwise},
                   {"perf_pruned", m.perf_pruned},
                   {"perf_original", m.perf_original}});
  }
  return doc.dump(2) + "\n";
}

std::vector<LayerPerfMeasurement> ParseLayerImportanceJson(std::string_view json_text) {
  std::vector<LayerPerfMeasurement> raw;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_array()) {
      throw Error(ErrorCode::kSchemaViolation, "layer importance document must be an array");
    }
    for (const json& entry : doc) {
      raw.push_back({entry.at("layer").get<int>(), entry.at("perf_pruned").get<double>(),
                     entry.at("perf_original").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation,
                std::string("layer importance document: ") + e.what());
  }
  return raw;
}

std::vector<LayerPerfMeasurement> LoadLayerImportance(const std::filesystem::path& path) {
  return ParseLayerImportanceJson(internal::ReadTextFile(path));
}

std::string LayerImportanceToJson(std::span<const LayerPerfMeasurement> raw) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const LayerPerfMeasurement& m : raw) {
    doc.push_back(
        {{"layer", m.layer}, {"perf_pruned", m.perf_pruned}, {"perf_original", m.perf_original}});
  }
  return doc.dump(2) + "\n";
}

std::vector<double> BuildLayerImportance(std::span<const LayerPerfMeasurement> raw,
                                         int layer_count) {
  std::vector<std::optional<double>> slots(layer_count);
  for (const LayerPerfMeasurement& m : raw) {
    if (m.layer < 1 || m.layer > layer_count) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "layer importance for unknown layer " + std::to_string(m.layer));
    }
    const double value = m.perf_original - m.perf_pruned;
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kNonFinite, "importance of layer " + std::to_string(m.layer));
    }
    if (slots[m.layer - 1]) {
      throw Error(ErrorCode::kSchemaViolation,
                  "duplicate measurement for layer " + std::to_string(m.layer));
    }
    slots[m.layer - 1] = value;
  }
  std::vector<double> importance;
  for (int l = 1; l <= layer_count; ++l) {
    if (!slots[l - 1]) {
      throw Error(ErrorCode::kMissingKey, "no importance measurement for layer " +
                                              std::to_string(l));
    }
    importance.push_back(*slots[l - 1]);
  }
  return importance;
}

std::map<SegmentKey, double> BuildImportanceTable(std::span<const RawPerfMeasurement> raw,
                                                  const std::vector<SegmentKey>* required) {
  std::map<SegmentKey, double> table;
  for (const RawPerfMeasurement& m : raw) {
    if (!std::isfinite(m.perf_pruned) || !std::isfinite(m.perf_original)) {
      throw Error(ErrorCode::kNonFinite, "non-finite performance for " + ToString(m.key));
    }
    const double importance = std::exp(m.perf_pruned - m.perf_original);
    if (!(importance > 0.0) || !std::isfinite(importance)) {
      throw Error(ErrorCode::kNonFinite,
                  "importance of " + ToString(m.key) + " is not a positive finite value");
    }
    if (!table.emplace(m.key, importance).second) {
      throw Error(ErrorCode::kSchemaViolation, "duplicate measurement for " + ToString(m.key));
    }
  }
  if (required != nullptr) {
    for (const SegmentKey& key : *required) {
      if (!table.contains(key)) {
        throw Error(ErrorCode::kMissingKey, "no importance measurement for " + ToString(key));
      }
    }
    if (table.size() != required->size()) {
      const std::set<SegmentKey> wanted(required->begin(), required->end());
      for (const auto& [key, value] : table) {
        if (!wanted.contains(key)) {
          throw Error(ErrorCode::kSchemaViolation,
                      "importance measured for a key outside the table: " + ToString(key));
        }
      }
    }
  }
  return table;
}

CostTables AssembleCostTables(const NetworkDescriptor& net,
                              std::map<SegmentKey, double> latency_ms,
                              std::map<SegmentKey, double> importance) {
  const std::vector<SegmentKey> required = RequiredKeys(net);
  const std::set<SegmentKey> wanted(required.begin(), required.end());
  auto check = [&](const std::map<SegmentKey, double>& map, const char* what) {
    for (const SegmentKey& key : required) {
      if (!map.contains(key)) {
        throw Error(ErrorCode::kMissingKey,
                    std::string(what) + " table has no entry for " + ToString(key));
      }
    }
    for (const auto& [key, value] : map) {
      if (!wanted.contains(key)) {
        throw Error(ErrorCode::kSchemaViolation, std::string(what) +
                                                     " table has an entry for a segment that "
                                                     "cannot be merged: " +
                                                     ToString(key));
      }
    }
  };
  check(latency_ms, "latency");
  check(importance, "importance");
  for (const auto& [key, value] : latency_ms) {
    if (!std::isfinite(value) || value < 0.0) {
      throw Error(ErrorCode::kNonFinite, "invalid latency for " + ToString(key));
    }
  }
  for (const auto& [key, value] : importance) {
    if (!std::isfinite(value) || !(value > 0.0)) {
      throw Error(ErrorCode::kNonFinite, "importance must be positive for " + ToString(key));
    }
  }

  CostTables tables;
  tables.layer_count = net.layer_count();
  tables.k0 = net.k0();
  tables.latency_ms = std::move(latency_ms);
  tables.importance = std::move(importance);
  for (const SegmentKey& key : required) {
    std::vector<int>& sizes = tables.feasible_sizes[{key.start, key.end}];
    if (sizes.empty() || sizes.back() != key.kernel_size) sizes.push_back(key.kernel_size);
  }
  return tables;
}

std::int64_t DefaultDiscretization(double t0_ms) {
  if (!(t0_ms > 0.0) || !std::isfinite(t0_ms)) {
    throw Error(ErrorCode::kInvalidArgument, "latency budget must be positive");
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(t0_ms * 10.0 + 1e-9)));
}

std::int64_t DiscretizeLatency(double latency_ms, double t0_ms, std::int64_t levels) {
  if (!(t0_ms > 0.0) || levels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "discretization needs T0 > 0 and P >= 1");
  }
  if (!std::isfinite(latency_ms) || latency_ms < 0.0) {
    throw Error(ErrorCode::kNonFinite, "latency must be finite and non-negative");
  }
  const double p = static_cast<double>(levels);
  auto units = static_cast<std::int64_t>(std::floor(latency_ms / t0_ms * p));
  while (units > 0 && static_cast<double>(units) * t0_ms / p > latency_ms) --units;
  while (static_cast<double>(units + 1) * t0_ms / p <= latency_ms) ++units;
  return units;
}

DiscreteLatencies Discretize(const std::map<SegmentKey, double>& latency_ms, double t0_ms,
                             std::int64_t levels) {
  DiscreteLatencies result;
  for (const auto& [key, value] : latency_ms) {
    result.units.emplace(key, DiscretizeLatency(value, t0_ms, levels));
  }
  result.budget_units = levels;
  return result;
}

}  // namespace depthforge
