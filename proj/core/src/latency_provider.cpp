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

#include "depthforge/latency_provider.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "depthforge/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace depthforge {
namespace {

std::string_view Trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() &&
         (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    fields.push_back(Trim(line.substr(begin, comma - begin)));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return fields;
}

int ParseInt(std::string_view field, int line_no) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kSchemaViolation, "latency CSV line " + std::to_string(line_no) +
                                                 ": \"" + std::string(field) +
                                                 "\" is not an integer");
  }
  return value;
}

double ParseDouble(std::string_view field, int line_no) {
  const std::string text(field);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kSchemaViolation, "latency CSV line " + std::to_string(line_no) +
                                                 ": \"" + text + "\" is not a finite decimal");
  }
  return value;
}

}  // namespace

AnalyticLatencyProvider::AnalyticLatencyProvider(Config config) : config_(config) {
  if (!(config_.device_constant_ns_per_mac > 0.0) || !(config_.depthwise_multiplier > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "analytic provider constants must be positive");
  }
}

AnalyticLatencyProvider::Config AnalyticLatencyProvider::ParseConfig(
    std::string_view json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    Config config;
    config.device_constant_ns_per_mac = doc.at("device_constant_ns_per_mac").get<double>();
    config.depthwise_multiplier = doc.value("depthwise_multiplier", 1.0);
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("analytic config: ") + e.what());
  }
}

AnalyticLatencyProvider AnalyticLatencyProvider::Load(const std::filesystem::path& path) {
  return AnalyticLatencyProvider(ParseConfig(internal::ReadTextFile(path)));
}

double AnalyticLatencyProvider::MacCount(const LatencyQuery& query) {
  if (!query.out_shape) {
    throw Error(ErrorCode::kProviderFailure,
                "analytic latency needs output shapes for " + ToString(query.key));
  }
  const double k = query.key.kernel_size;
  return static_cast<double>(query.out_shape->height) * query.out_shape->width *
         query.out_channels * (query.in_channels / query.groups) * k * k;
}

double AnalyticLatencyProvider::LatencyMs(const LatencyQuery& query) const {
  if (query.identity) return 0.0;
  double ns = MacCount(query) * config_.device_constant_ns_per_mac;
  if (query.key.depthwise) ns *= config_.depthwise_multiplier;
  return ns * 1e-6;
}

TableLatencyProvider::TableLatencyProvider(std::map<SegmentKey, double> entries)
    : entries_(std::move(entries)) {}

TableLatencyProvider TableLatencyProvider::Parse(std::string_view csv_text) {
  std::map<SegmentKey, double> entries;
  std::istringstream stream{std::string(csv_text)};
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::vector<std::string_view> fields = SplitCommas(trimmed);
    if (!header_seen) {
      if (fields.size() != 5 || fields[0] != "i" || fields[1] != "j" || fields[2] != "k" ||
          fields[3] != "depthwise" || fields[4] != "latency_ms") {
        throw Error(ErrorCode::kSchemaViolation,
                    "latency CSV header must be i,j,k,depthwise,latency_ms");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) {
      throw Error(ErrorCode::kSchemaViolation,
                  "latency CSV line " + std::to_string(line_no) + ": expected 5 fields");
    }
    SegmentKey key{ParseInt(fields[0], line_no), ParseInt(fields[1], line_no),
                   ParseInt(fields[2], line_no), false};
    const int depthwise = ParseInt(fields[3], line_no);
    if (depthwise != 0 && depthwise != 1) {
      throw Error(ErrorCode::kSchemaViolation,
                  "latency CSV line " + std::to_string(line_no) + ": depthwise must be 0 or 1");
    }
    key.depthwise = depthwise == 1;
    const double latency = ParseDouble(fields[4], line_no);
    if (latency < 0.0) {
      throw Error(ErrorCode::kSchemaViolation,
                  "latency CSV line " + std::to_string(line_no) + ": negative latency");
    }
    if (!entries.emplace(key, latency).second) {
      throw Error(ErrorCode::kSchemaViolation, "latency CSV: duplicate row for " + ToString(key));
    }
  }
  if (!header_seen) throw Error(ErrorCode::kSchemaViolation, "latency CSV is empty");
  return TableLatencyProvider(std::move(entries));
}

TableLatencyProvider TableLatencyProvider::Load(const std::filesystem::path& path) {
  return Parse(internal::ReadTextFile(path));
}

double TableLatencyProvider::LatencyMs(const LatencyQuery& query) const {
  auto it = entries_.find(query.key);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kMissingKey, "latency table has no row for " + ToString(query.key));
  }
  return it->second;
}

}  // namespace depthforge
