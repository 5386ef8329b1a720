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

#ifndef DEPTHFORGE_TOOLS_CLI_HPP_
#define DEPTHFORGE_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace depthforge::cli {

// Runs one `depthforge` invocation. args[0] is the program name. Errors are
// reported on `err` as a JSON object {"error": code, "message": text}.
//
// Exit codes: 0 success, 1 verification found violations, 2 error.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace depthforge::cli

#endif  // DEPTHFORGE_TOOLS_CLI_HPP_
