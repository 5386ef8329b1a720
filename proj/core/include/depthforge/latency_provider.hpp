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

#ifndef DEPTHFORGE_LATENCY_PROVIDER_HPP_
#define DEPTHFORGE_LATENCY_PROVIDER_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string_view>

#include "depthforge/network.hpp"
#include "depthforge/segment_key.hpp"

namespace depthforge {

// Geometry of one merged layer whose latency is requested.
struct LatencyQuery {
  SegmentKey key;
  int in_channels = 0;
  int out_channels = 0;
  int groups = 1;
  int stride = 1;
  std::optional<FeatureShape> in_shape;
  std::optional<FeatureShape> out_shape;
  bool identity = false;  // every layer of the segment was replaced by identity
};

// Implementations must be safe to call concurrently.
class LatencyProvider {
 public:
  virtual ~LatencyProvider() = default;
  virtual double LatencyMs(const LatencyQuery& query) const = 0;
};

// latency = device constant x multiply-accumulate count, with a separate
// multiplier for depthwise layers. Identity layers cost nothing.
class AnalyticLatencyProvider final : public LatencyProvider {
 public:
  struct Config {
    double device_constant_ns_per_mac = 1.0;
    double depthwise_multiplier = 1.0;
  };

  explicit AnalyticLatencyProvider(Config config);

  static Config ParseConfig(std::string_view json_text);
  static AnalyticLatencyProvider Load(const std::filesystem::path& path);

  static double MacCount(const LatencyQuery& query);
  double LatencyMs(const LatencyQuery& query) const override;

  const Config& config() const { return config_; }

 private:
  Config config_;
};

// Exact lookup into measured latencies; header `i,j,k,depthwise,latency_ms`.
class TableLatencyProvider final : public LatencyProvider {
 public:
  explicit TableLatencyProvider(std::map<SegmentKey, double> entries);

  static TableLatencyProvider Parse(std::string_view csv_text);
  static TableLatencyProvider Load(const std::filesystem::path& path);

  double LatencyMs(const LatencyQuery& query) const override;
  const std::map<SegmentKey, double>& entries() const { return entries_; }

 private:
  std::map<SegmentKey, double> entries_;
};

}  // namespace depthforge

#endif  // DEPTHFORGE_LATENCY_PROVIDER_HPP_
