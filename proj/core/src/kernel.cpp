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

#include "depthforge/kernel.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "depthforge/error.hpp"

namespace depthforge {
namespace {

void CheckGeometry(int out_channels, int in_channels, int kernel_size, int stride,
                   int groups) {
  if (out_channels < 1 || in_channels < 1 || kernel_size < 1 || stride < 1 ||
      groups < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel dimensions, stride and groups must be positive");
  }
  if (in_channels % groups != 0 || out_channels % groups != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "groups must divide both channel counts");
  }
}

std::size_t WeightCount(int out_channels, int in_channels, int kernel_size, int groups) {
  return static_cast<std::size_t>(out_channels) * (in_channels / groups) * kernel_size *
         kernel_size;
}

}  // namespace

FeatureMap::FeatureMap(int channels, int height, int width)
    : FeatureMap(channels, height, width,
                 std::vector<double>(static_cast<std::size_t>(channels) * height * width)) {}

FeatureMap::FeatureMap(int channels, int height, int width, std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (channels < 1 || height < 1 || width < 1) {
    throw Error(ErrorCode::kShapeMismatch, "feature map dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw Error(ErrorCode::kShapeMismatch, "feature map data size mismatch");
  }
}

KernelTensor::KernelTensor(int out_channels, int in_channels, int kernel_size,
                           int stride, int groups)
    : out_channels_(out_channels),
      in_channels_(in_channels),
      kernel_size_(kernel_size),
      stride_(stride),
      groups_(groups) {
  CheckGeometry(out_channels, in_channels, kernel_size, stride, groups);
  weights_.assign(WeightCount(out_channels, in_channels, kernel_size, groups), 0.0);
  bias_.assign(out_channels, 0.0);
}

KernelTensor::KernelTensor(int out_channels, int in_channels, int kernel_size,
                           int stride, int groups, std::vector<double> weights,
                           std::vector<double> bias)
    : out_channels_(out_channels),
      in_channels_(in_channels),
      kernel_size_(kernel_size),
      stride_(stride),
      groups_(groups),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  CheckGeometry(out_channels, in_channels, kernel_size, stride, groups);
  if (weights_.size() != WeightCount(out_channels, in_channels, kernel_size, groups)) {
    throw Error(ErrorCode::kShapeMismatch, "kernel weight count mismatch");
  }
  if (bias_.empty()) bias_.assign(out_channels, 0.0);
  if (bias_.size() != static_cast<std::size_t>(out_channels)) {
    throw Error(ErrorCode::kShapeMismatch, "bias length must equal out_channels");
  }
}

KernelTensor IdentityKernel(int channels) {
  if (channels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "identity kernel needs >= 1 channel");
  }
  KernelTensor identity(channels, channels, 1, 1, channels);
  for (int c = 0; c < channels; ++c) identity.at(c, 0, 0, 0) = 1.0;
  return identity;
}

int MergedKernelSize(std::span<const int> sizes) {
  if (sizes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "merged kernel size of an empty stack");
  }
  int size = 1;
  for (int k : sizes) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "kernel sizes must be >= 1");
    size += k - 1;
  }
  return size;
}

int MergedKernelSizeStrided(int k1, int s1, int k2) { return (k2 - 1) * s1 + k1; }

KernelTensor MergePair(const KernelTensor& first, const KernelTensor& second) {
  if (second.in_channels() != first.out_channels()) {
    throw Error(ErrorCode::kChannelMismatch,
                "cannot merge: second kernel expects " +
                    std::to_string(second.in_channels()) + " input channels, first produces " +
                    std::to_string(first.out_channels()));
  }
  const int groups = std::gcd(first.groups(), second.groups());
  const int k1 = first.kernel_size();
  const int k2 = second.kernel_size();
  const int s1 = first.stride();
  KernelTensor merged(second.out_channels(), first.in_channels(),
                      MergedKernelSizeStrided(k1, s1, k2), s1 * second.stride(), groups);

  const int in_per_result_group = first.in_channels() / groups;
  const int out_per_result_group = second.out_channels() / groups;
  const int ipg1 = first.in_per_group();
  const int opg1 = first.out_per_group();
  const int ipg2 = second.in_per_group();
  const int opg2 = second.out_per_group();

  for (int o = 0; o < second.out_channels(); ++o) {
    const int group2 = o / opg2;
    const int result_group = o / out_per_result_group;
    double bias_acc = 0.0;
    for (int m_local = 0; m_local < ipg2; ++m_local) {
      const int m = group2 * ipg2 + m_local;
      const int group1 = m / opg1;
      for (int uy = 0; uy < k2; ++uy) {
        for (int ux = 0; ux < k2; ++ux) {
          const double w2 = second.at(o, m_local, uy, ux);
          bias_acc += w2 * first.bias()[m];
          for (int c_local1 = 0; c_local1 < ipg1; ++c_local1) {
            const int c = group1 * ipg1 + c_local1;
            const int c_result = c - result_group * in_per_result_group;
            for (int vy = 0; vy < k1; ++vy) {
              for (int vx = 0; vx < k1; ++vx) {
                merged.at(o, c_result, s1 * uy + vy, s1 * ux + vx) +=
                    w2 * first.at(m, c_local1, vy, vx);
              }
            }
          }
        }
      }
    }
    merged.bias()[o] = second.bias()[o] + bias_acc;
  }
  return merged;
}

KernelTensor MergeSequence(std::span<const KernelTensor> kernels,
                           const std::vector<bool>& keep_mask) {
  if (kernels.empty()) throw Error(ErrorCode::kInvalidArgument, "empty kernel stack");
  if (keep_mask.size() != kernels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "keep mask length must match stack length");
  }
  auto substitute = [&](std::size_t t) -> KernelTensor {
    const KernelTensor& k = kernels[t];
    if (keep_mask[t]) return k;
    if (k.in_channels() != k.out_channels() || k.stride() != 1) {
      throw Error(ErrorCode::kChannelMismatch,
                  "layer " + std::to_string(t) +
                      " of the stack changes shape and cannot be replaced by identity");
    }
    return IdentityKernel(k.in_channels());
  };
  KernelTensor merged = substitute(0);
  for (std::size_t t = 1; t < kernels.size(); ++t) {
    merged = MergePair(merged, substitute(t));
  }
  return merged;
}

KernelTensor AddResidual(const KernelTensor& kernel) {
  if (kernel.in_channels() != kernel.out_channels() || kernel.stride() != 1 ||
      kernel.kernel_size() % 2 == 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "skip-addition fusion needs a stride-1, odd-sized, shape-preserving kernel");
  }
  KernelTensor fused = kernel;
  const int center = kernel.kernel_size() / 2;
  const int ipg = kernel.in_per_group();
  for (int o = 0; o < kernel.out_channels(); ++o) {
    const int group = o / kernel.out_per_group();
    fused.at(o, o - group * ipg, center, center) += 1.0;
  }
  return fused;
}

FeatureMap ConvReference(const FeatureMap& input, const KernelTensor& kernel,
                         int padding) {
  if (input.channels() != kernel.in_channels()) {
    throw Error(ErrorCode::kShapeMismatch,
                "input has " + std::to_string(input.channels()) + " channels, kernel expects " +
                    std::to_string(kernel.in_channels()));
  }
  if (padding < 0) throw Error(ErrorCode::kInvalidArgument, "negative padding");
  const int k = kernel.kernel_size();
  const int s = kernel.stride();
  const int out_h = (input.height() + 2 * padding - k) / s + 1;
  const int out_w = (input.width() + 2 * padding - k) / s + 1;
  if (input.height() + 2 * padding < k || input.width() + 2 * padding < k) {
    throw Error(ErrorCode::kShapeMismatch, "input smaller than the kernel");
  }
  FeatureMap output(kernel.out_channels(), out_h, out_w);
  const int ipg = kernel.in_per_group();
  for (int o = 0; o < kernel.out_channels(); ++o) {
    const int group = o / kernel.out_per_group();
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        double acc = kernel.bias()[o];
        for (int cl = 0; cl < ipg; ++cl) {
          const int c = group * ipg + cl;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y * s + ky - padding;
            if (iy < 0 || iy >= input.height()) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x * s + kx - padding;
              if (ix < 0 || ix >= input.width()) continue;
              acc += kernel.at(o, cl, ky, kx) * input.at(c, iy, ix);
            }
          }
        }
        output.at(o, y, x) = acc;
      }
    }
  }
  return output;
}

namespace {

void CheckBatchNorm(const BatchNormParams& bn, int channels) {
  const auto n = static_cast<std::size_t>(channels);
  if (bn.gamma.size() != n || bn.beta.size() != n || bn.running_mean.size() != n ||
      bn.running_var.size() != n) {
    throw Error(ErrorCode::kShapeMismatch,
                "batch-norm vectors must have length " + std::to_string(channels));
  }
  if (!(bn.epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be > 0");
  for (double v : bn.running_var) {
    if (v < 0.0) throw Error(ErrorCode::kInvalidArgument, "running_var must be >= 0");
  }
}

}  // namespace

KernelTensor FoldBatchNorm(const KernelTensor& kernel, const BatchNormParams& bn) {
  CheckBatchNorm(bn, kernel.out_channels());
  KernelTensor folded = kernel;
  const std::size_t per_output =
      static_cast<std::size_t>(kernel.in_per_group()) * kernel.kernel_size() *
      kernel.kernel_size();
  for (int o = 0; o < kernel.out_channels(); ++o) {
    const double scale = bn.gamma[o] / std::sqrt(bn.running_var[o] + bn.epsilon);
    auto w = folded.weights().subspan(o * per_output, per_output);
    for (double& v : w) v *= scale;
    folded.bias()[o] = (kernel.bias()[o] - bn.running_mean[o]) * scale + bn.beta[o];
  }
  return folded;
}

FeatureMap ApplyBatchNorm(const FeatureMap& input, const BatchNormParams& bn) {
  CheckBatchNorm(bn, input.channels());
  FeatureMap output = input;
  for (int c = 0; c < input.channels(); ++c) {
    const double inv_std = 1.0 / std::sqrt(bn.running_var[c] + bn.epsilon);
    for (int y = 0; y < input.height(); ++y) {
      for (int x = 0; x < input.width(); ++x) {
        output.at(c, y, x) =
            (input.at(c, y, x) - bn.running_mean[c]) * inv_std * bn.gamma[c] + bn.beta[c];
      }
    }
  }
  return output;
}

}  // namespace depthforge
