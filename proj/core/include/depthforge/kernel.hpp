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

#ifndef DEPTHFORGE_KERNEL_HPP_
#define DEPTHFORGE_KERNEL_HPP_

#include <span>
#include <vector>

namespace depthforge {

// A (channels, height, width) activation tensor in double precision.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width);
  FeatureMap(int channels, int height, int width, std::vector<double> data);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }

  double& at(int c, int y, int x) { return data_[Offset(c, y, x)]; }
  double at(int c, int y, int x) const { return data_[Offset(c, y, x)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

 private:
  std::size_t Offset(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Convolution parameters laid out as (out_channels, in_channels / groups, k, k)
// in row-major order, plus a per-output-channel bias.
class KernelTensor {
 public:
  KernelTensor(int out_channels, int in_channels, int kernel_size, int stride,
               int groups);
  KernelTensor(int out_channels, int in_channels, int kernel_size, int stride,
               int groups, std::vector<double> weights, std::vector<double> bias);

  int out_channels() const { return out_channels_; }
  int in_channels() const { return in_channels_; }
  int kernel_size() const { return kernel_size_; }
  int stride() const { return stride_; }
  int groups() const { return groups_; }
  int in_per_group() const { return in_channels_ / groups_; }
  int out_per_group() const { return out_channels_ / groups_; }
  bool depthwise() const {
    return groups_ == in_channels_ && groups_ == out_channels_;
  }

  double& at(int o, int c_local, int y, int x) { return weights_[Offset(o, c_local, y, x)]; }
  double at(int o, int c_local, int y, int x) const {
    return weights_[Offset(o, c_local, y, x)];
  }

  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }
  std::span<const double> bias() const { return bias_; }
  std::span<double> bias() { return bias_; }

 private:
  std::size_t Offset(int o, int c_local, int y, int x) const {
    return ((static_cast<std::size_t>(o) * in_per_group() + c_local) * kernel_size_ + y) *
               kernel_size_ + x;
  }

  int out_channels_;
  int in_channels_;
  int kernel_size_;
  int stride_;
  int groups_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct BatchNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double epsilon = 1e-5;
};

// 1x1 depthwise kernel with unit weights: maps every input to itself.
KernelTensor IdentityKernel(int channels);

// Kernel size after merging stride-1 layers: 1 + sum(k - 1).
int MergedKernelSize(std::span<const int> sizes);

// Kernel size after merging (k1, stride s1) with a following kernel k2.
int MergedKernelSizeStrided(int k1, int s1, int k2);

// Single kernel equivalent to applying `first` then `second` without padding
// in between. The result has stride first.stride * second.stride and
// gcd(first.groups, second.groups) groups, so two depthwise kernels stay
// depthwise and a depthwise/standard pair becomes a standard convolution.
KernelTensor MergePair(const KernelTensor& first, const KernelTensor& second);

// Left-to-right fold of MergePair where entries with keep_mask == false are
// replaced by the identity kernel.
KernelTensor MergeSequence(std::span<const KernelTensor> kernels,
                           const std::vector<bool>& keep_mask);

// Adds the identity to a stride-1, odd-sized kernel with equal channel
// counts, fusing a skip-addition around it.
KernelTensor AddResidual(const KernelTensor& kernel);

// Naive cross-correlation (no kernel flip) with zero padding.
FeatureMap ConvReference(const FeatureMap& input, const KernelTensor& kernel,
                         int padding);

// Returns conv' with bn(conv(x)) == conv'(x).
KernelTensor FoldBatchNorm(const KernelTensor& kernel, const BatchNormParams& bn);

// Inference-mode batch normalization, per channel.
FeatureMap ApplyBatchNorm(const FeatureMap& input, const BatchNormParams& bn);

}  // namespace depthforge

#endif  // DEPTHFORGE_KERNEL_HPP_
