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

#ifndef DEPTHFORGE_KERNEL_IO_HPP_
#define DEPTHFORGE_KERNEL_IO_HPP_

#include <filesystem>
#include <string>

#include "depthforge/kernel.hpp"

namespace depthforge {

// Kernel tensors are stored as two files side by side:
//   <name>.bin   weights as flat little-endian float64, (out, in/groups, k, k)
//   <name>.json  {"out_channels", "in_channels", "groups", "k", "stride", "bias"}
void WriteKernel(const std::filesystem::path& blob_path, const KernelTensor& kernel);
KernelTensor ReadKernel(const std::filesystem::path& blob_path);

std::filesystem::path SidecarPath(const std::filesystem::path& blob_path);

// {"gamma": [...], "beta": [...], "running_mean": [...], "running_var": [...],
//  "epsilon": e}
BatchNormParams ParseBatchNorm(const std::string& json_text);
BatchNormParams ReadBatchNorm(const std::filesystem::path& path);

}  // namespace depthforge

#endif  // DEPTHFORGE_KERNEL_IO_HPP_
