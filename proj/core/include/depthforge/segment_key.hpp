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

#ifndef DEPTHFORGE_SEGMENT_KEY_HPP_
#define DEPTHFORGE_SEGMENT_KEY_HPP_

#include <compare>
#include <string>

namespace depthforge {

// Identifies one merged layer: segment (start, end] collapsed into a kernel
// of size kernel_size, depthwise or not.
struct SegmentKey {
  int start = 0;
  int end = 0;
  int kernel_size = 1;
  bool depthwise = false;

  auto operator<=>(const SegmentKey&) const = default;
};

inline std::string ToString(const SegmentKey& key) {
  return "(i=" + std::to_string(key.start) + ", j=" + std::to_string(key.end) +
         ", k=" + std::to_string(key.kernel_size) +
         ", depthwise=" + (key.depthwise ? "1" : "0") + ")";
}

}  // namespace depthforge

#endif  // DEPTHFORGE_SEGMENT_KEY_HPP_
