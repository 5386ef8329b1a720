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

#ifndef DEPTHFORGE_PLAN_IO_HPP_
#define DEPTHFORGE_PLAN_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "depthforge/planner.hpp"

namespace depthforge {

const char* PlanModeName(PlanMode mode);

// Deterministic JSON rendering: fixed key order, shortest round-trip doubles.
std::string PlanToJson(const MergePlan& plan);

MergePlan ParsePlan(std::string_view json_text);
MergePlan LoadPlan(const std::filesystem::path& path);
void SavePlan(const MergePlan& plan, const std::filesystem::path& path);

}  // namespace depthforge

#endif  // DEPTHFORGE_PLAN_IO_HPP_
