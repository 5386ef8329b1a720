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

#include "depthforge/error.hpp"

namespace depthforge {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kSchemaViolation:
      return "schema_violation";
    case ErrorCode::kShapeMismatch:
      return "shape_mismatch";
    case ErrorCode::kIrreducibleMismatch:
      return "irreducible_mismatch";
    case ErrorCode::kIndexOutOfRange:
      return "index_out_of_range";
    case ErrorCode::kChannelMismatch:
      return "channel_mismatch";
    case ErrorCode::kSegmentNotAllowed:
      return "segment_not_allowed";
    case ErrorCode::kInfeasibleKernelSize:
      return "infeasible_kernel_size";
    case ErrorCode::kMissingNorm:
      return "missing_norm";
    case ErrorCode::kMissingKey:
      return "missing_key";
    case ErrorCode::kNonFinite:
      return "non_finite";
    case ErrorCode::kProviderFailure:
      return "provider_failure";
    case ErrorCode::kInfeasibleBudget:
      return "infeasible_budget";
    case ErrorCode::kGuardLimit:
      return "guard_limit";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace depthforge
