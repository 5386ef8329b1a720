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

#ifndef DEPTHFORGE_ERROR_HPP_
#define DEPTHFORGE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace depthforge {

// Machine-readable failure categories. The CLI reports these verbatim.
enum class ErrorCode {
  kInvalidArgument,
  kSchemaViolation,
  kShapeMismatch,
  kIrreducibleMismatch,
  kIndexOutOfRange,
  kChannelMismatch,
  kSegmentNotAllowed,
  kInfeasibleKernelSize,
  kMissingNorm,
  kMissingKey,
  kNonFinite,
  kProviderFailure,
  kInfeasibleBudget,
  kGuardLimit,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace depthforge

#endif  // DEPTHFORGE_ERROR_HPP_
