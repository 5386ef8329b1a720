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

#include "depthforge/kernel_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "depthforge/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace depthforge {
namespace {

using nlohmann::json;

std::uint64_t ToLittleEndian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::little) {
    return bits;
  } else {
    std::uint64_t swapped = 0;
    for (int b = 0; b < 8; ++b) {
      swapped = (swapped << 8) | ((bits >> (8 * b)) & 0xffu);
    }
    return swapped;
  }
}

}  // namespace

std::filesystem::path SidecarPath(const std::filesystem::path& blob_path) {
  std::filesystem::path sidecar = blob_path;
  sidecar.replace_extension(".json");
  return sidecar;
}

void WriteKernel(const std::filesystem::path& blob_path, const KernelTensor& kernel) {
  std::ofstream out(blob_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + blob_path.string());
  for (double w : kernel.weights()) {
    const std::uint64_t bits = ToLittleEndian(std::bit_cast<std::uint64_t>(w));
    char bytes[8];
    std::memcpy(bytes, &bits, sizeof bytes);
    out.write(bytes, sizeof bytes);
  }
  if (!out) throw Error(ErrorCode::kIo, "short write to " + blob_path.string());

  json sidecar = {
      {"out_channels", kernel.out_channels()},
      {"in_channels", kernel.in_channels()},
      {"groups", kernel.groups()},
      {"k", kernel.kernel_size()},
      {"stride", kernel.stride()},
      {"bias", std::vector<double>(kernel.bias().begin(), kernel.bias().end())},
  };
  internal::WriteTextFile(SidecarPath(blob_path), sidecar.dump(2) + "\n");
}

KernelTensor ReadKernel(const std::filesystem::path& blob_path) {
  json sidecar;
  try {
    sidecar = json::parse(internal::ReadTextFile(SidecarPath(blob_path)));
    const int out_channels = sidecar.at("out_channels").get<int>();
    const int in_channels = sidecar.at("in_channels").get<int>();
    const int groups = sidecar.at("groups").get<int>();
    const int k = sidecar.at("k").get<int>();
    const int stride = sidecar.at("stride").get<int>();
    std::vector<double> bias = sidecar.value("bias", std::vector<double>{});

    const std::string raw = internal::ReadTextFile(blob_path);
    if (raw.size() % 8 != 0) {
      throw Error(ErrorCode::kShapeMismatch, blob_path.string() + ": size not a multiple of 8");
    }
    std::vector<double> weights(raw.size() / 8);
    for (std::size_t n = 0; n < weights.size(); ++n) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, raw.data() + 8 * n, 8);
      weights[n] = std::bit_cast<double>(ToLittleEndian(bits));
    }
    return KernelTensor(out_channels, in_channels, k, stride, groups, std::move(weights),
                        std::move(bias));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation,
                SidecarPath(blob_path).string() + ": " + e.what());
  }
}

BatchNormParams ParseBatchNorm(const std::string& json_text) {
  try {
    const json doc = json::parse(json_text);
    BatchNormParams bn;
    bn.gamma = doc.at("gamma").get<std::vector<double>>();
    bn.beta = doc.at("beta").get<std::vector<double>>();
    bn.running_mean = doc.at("running_mean").get<std::vector<double>>();
    bn.running_var = doc.at("running_var").get<std::vector<double>>();
    bn.epsilon = doc.value("epsilon", 1e-5);
    return bn;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("batch-norm document: ") + e.what());
  }
}

BatchNormParams ReadBatchNorm(const std::filesystem::path& path) {
  return ParseBatchNorm(internal::ReadTextFile(path));
}

}  // namespace depthforge
