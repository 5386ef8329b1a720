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

#include "depthforge/plan_io.hpp"

#include <cmath>

#include "depthforge/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace depthforge {

using nlohmann::ordered_json;

const char* PlanModeName(PlanMode mode) {
  return mode == PlanMode::kLayerMerge ? "layer-merge" : "layer-only";
}

std::string PlanToJson(const MergePlan& plan) {
  ordered_json doc;
  doc["mode"] = PlanModeName(plan.mode);
  doc["objective"] = plan.objective;
  doc["latency_units"] = plan.latency_units;
  doc["budget_units"] = plan.budget_units;
  doc["kept_activations"] = plan.kept_activations;
  doc["kept_convs"] = plan.kept_convs;
  ordered_json segments = ordered_json::array();
  for (const PlanSegment& seg : plan.segments) {
    ordered_json s;
    s["start"] = seg.start;
    s["end"] = seg.end;
    s["kernel_size"] = seg.kernel_size;
    s["depthwise"] = seg.depthwise;
    segments.push_back(std::move(s));
  }
  doc["segments"] = std::move(segments);
  return doc.dump(2) + "\n";
}

namespace {

template <typename T>
T Field(const ordered_json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw Error(ErrorCode::kSchemaViolation, std::string("plan is missing field \"") + name + "\"");
  }
  try {
    return obj.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kSchemaViolation, std::string("plan field \"") + name +
                                                 "\" has the wrong type");
  }
}

}  // namespace

MergePlan ParsePlan(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("plan is not valid JSON: ") + e.what());
  }
  MergePlan plan;
  const auto mode = Field<std::string>(doc, "mode");
  if (mode == "layer-merge") {
    plan.mode = PlanMode::kLayerMerge;
  } else if (mode == "layer-only") {
    plan.mode = PlanMode::kLayerOnly;
  } else {
    throw Error(ErrorCode::kSchemaViolation, "unknown plan mode \"" + mode + "\"");
  }
  plan.objective = Field<double>(doc, "objective");
  if (!std::isfinite(plan.objective)) {
    throw Error(ErrorCode::kNonFinite, "plan objective is not finite");
  }
  plan.latency_units = Field<std::int64_t>(doc, "latency_units");
  plan.budget_units = Field<std::int64_t>(doc, "budget_units");
  plan.kept_activations = Field<std::vector<int>>(doc, "kept_activations");
  plan.kept_convs = Field<std::vector<int>>(doc, "kept_convs");
  const auto segments = Field<ordered_json>(doc, "segments");
  if (!segments.is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "plan field \"segments\" must be an array");
  }
  for (const ordered_json& s : segments) {
    plan.segments.push_back({Field<int>(s, "start"), Field<int>(s, "end"),
                             Field<int>(s, "kernel_size"), Field<bool>(s, "depthwise")});
  }
  return plan;
}

MergePlan LoadPlan(const std::filesystem::path& path) {
  return ParsePlan(internal::ReadTextFile(path));
}

void SavePlan(const MergePlan& plan, const std::filesystem::path& path) {
  internal::WriteTextFile(path, PlanToJson(plan));
}

}  // namespace depthforge
