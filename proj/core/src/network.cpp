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

#include "depthforge/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "depthforge/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace depthforge {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

std::string LayerTag(const LayerDescriptor& layer) {
  return "layer " + std::to_string(layer.index);
}

void ValidateLayer(const LayerDescriptor& layer, int count) {
  const std::string tag = LayerTag(layer);
  if (layer.kernel_size < 1 || layer.stride < 1) {
    Fail(ErrorCode::kSchemaViolation, tag + ": kernel_size and stride must be >= 1");
  }
  if (layer.in_channels < 1 || layer.out_channels < 1 || layer.groups < 1) {
    Fail(ErrorCode::kSchemaViolation, tag + ": channels and groups must be >= 1");
  }
  if (layer.in_channels % layer.groups != 0 ||
      layer.out_channels % layer.groups != 0) {
    Fail(ErrorCode::kSchemaViolation,
         tag + ": groups must divide in_channels and out_channels");
  }
  const bool depthwise_geometry = layer.groups == layer.in_channels &&
                                  layer.groups == layer.out_channels;
  if (layer.depthwise() != depthwise_geometry) {
    Fail(ErrorCode::kSchemaViolation,
         tag + ": kind depthwise-conv requires groups == in_channels == "
               "out_channels and vice versa");
  }
  if (layer.in_shape.has_value() != layer.out_shape.has_value()) {
    Fail(ErrorCode::kSchemaViolation,
         tag + ": in_shape and out_shape must be given together");
  }
  if (layer.in_shape) {
    const FeatureShape& in = *layer.in_shape;
    const FeatureShape& out = *layer.out_shape;
    if (in.channels != layer.in_channels || out.channels != layer.out_channels) {
      Fail(ErrorCode::kShapeMismatch, tag + ": shape channels disagree with "
                                            "in_channels/out_channels");
    }
    if (in.height < 1 || in.width < 1) {
      Fail(ErrorCode::kShapeMismatch, tag + ": empty input feature map");
    }
    if (out.height != SamePaddedExtent(in.height, layer.kernel_size, layer.stride) ||
        out.width != SamePaddedExtent(in.width, layer.kernel_size, layer.stride)) {
      Fail(ErrorCode::kShapeMismatch,
           tag + ": out_shape inconsistent with in_shape, kernel_size and stride");
    }
  }
  if (layer.l1_norm && (!std::isfinite(*layer.l1_norm) || *layer.l1_norm < 0.0)) {
    Fail(ErrorCode::kSchemaViolation, tag + ": l1_norm must be finite and >= 0");
  }
  if (layer.index == count && layer.has_activation_after) {
    Fail(ErrorCode::kSchemaViolation,
         tag + ": the last layer cannot carry an activation");
  }
}

bool ShapeChanges(const LayerDescriptor& layer) {
  return *layer.in_shape != *layer.out_shape;
}

}  // namespace

int SamePaddedExtent(int in_extent, int kernel_size, int stride) {
  const int padding = (kernel_size - 1) / 2;
  return (in_extent + 2 * padding - kernel_size) / stride + 1;
}

std::set<int> StrideRuleBarriers(std::span<const LayerDescriptor> layers) {
  std::set<int> barriers;
  const int count = static_cast<int>(layers.size());
  for (int pos = 0; pos < count; ++pos) {
    if (layers[pos].stride <= 1) continue;
    // Layers are 1-based: layers[pos] is layer pos+1.
    for (int next = pos + 1; next < count; ++next) {
      if (layers[next].kernel_size > 1) {
        barriers.insert(next);  // boundary between layer `next` and `next+1`
        break;
      }
    }
  }
  return barriers;
}

NetworkDescriptor::NetworkDescriptor(std::string name,
                                     std::vector<LayerDescriptor> layers,
                                     std::optional<std::set<int>> irreducible,
                                     std::set<int> barriers,
                                     std::vector<SkipAddSpan> skip_add_spans)
    : name_(std::move(name)),
      layers_(std::move(layers)),
      barriers_(std::move(barriers)),
      spans_(std::move(skip_add_spans)) {
  const int count = layer_count();
  if (count == 0) Fail(ErrorCode::kSchemaViolation, "network has no layers");
  for (int pos = 0; pos < count; ++pos) {
    if (layers_[pos].index != pos + 1) {
      Fail(ErrorCode::kIndexOutOfRange,
           "layer indices must be exactly 1..L in order; found " +
               std::to_string(layers_[pos].index) + " at position " +
               std::to_string(pos + 1));
    }
    ValidateLayer(layers_[pos], count);
  }

  std::set<int> forced;
  for (const LayerDescriptor& layer : layers_) {
    if (layer.in_shape && ShapeChanges(layer)) forced.insert(layer.index);
  }
  if (irreducible) {
    for (int index : *irreducible) {
      if (index < 1 || index > count) {
        Fail(ErrorCode::kIndexOutOfRange,
             "irreducible index " + std::to_string(index) + " out of range");
      }
    }
    for (int index : forced) {
      if (!irreducible->contains(index)) {
        Fail(ErrorCode::kIrreducibleMismatch,
             "layer " + std::to_string(index) +
                 " changes feature-map shape but is not declared irreducible");
      }
    }
    for (int index : *irreducible) {
      const LayerDescriptor& layer = layers_[index - 1];
      if (layer.in_shape && !ShapeChanges(layer)) {
        Fail(ErrorCode::kIrreducibleMismatch,
             "layer " + std::to_string(index) +
                 " is declared irreducible but preserves its shape");
      }
    }
    irreducible_ = std::move(*irreducible);
  } else {
    if (!has_all_shapes()) {
      Fail(ErrorCode::kSchemaViolation,
           "irreducible set must be declared when shapes are missing");
    }
    irreducible_ = std::move(forced);
  }

  for (int b : barriers_) {
    if (b < 1 || b > count - 1) {
      Fail(ErrorCode::kIndexOutOfRange,
           "barrier " + std::to_string(b) + " outside 1..L-1");
    }
  }
  barriers_.merge(StrideRuleBarriers(layers_));

  for (const SkipAddSpan& span : spans_) {
    if (span.start < 0 || span.end > count || span.start >= span.end) {
      Fail(ErrorCode::kIndexOutOfRange,
           "skip-add span (" + std::to_string(span.start) + ", " +
               std::to_string(span.end) + "] outside 0..L");
    }
  }
  std::sort(spans_.begin(), spans_.end());
  spans_.erase(std::unique(spans_.begin(), spans_.end()), spans_.end());

  barrier_prefix_.assign(count + 1, 0);
  for (int b = 1; b <= count; ++b) {
    barrier_prefix_[b] = barrier_prefix_[b - 1] + (barriers_.contains(b) ? 1 : 0);
  }
}

const LayerDescriptor& NetworkDescriptor::layer(int index) const {
  if (index < 1 || index > layer_count()) {
    Fail(ErrorCode::kIndexOutOfRange,
         "layer index " + std::to_string(index) + " out of range");
  }
  return layers_[index - 1];
}

bool NetworkDescriptor::removable(int index) const {
  const LayerDescriptor& l = layer(index);
  return !is_irreducible(index) && l.stride == 1 &&
         l.in_channels == l.out_channels;
}

int NetworkDescriptor::k0() const {
  int total = 0;
  for (const LayerDescriptor& l : layers_) total += l.kernel_size;
  return total;
}

bool NetworkDescriptor::SegmentAllowed(int i, int j) const {
  if (i < 0 || j > layer_count() || i >= j) return false;
  if (j - i == 1) return true;
  return barrier_prefix_[j - 1] - barrier_prefix_[i] == 0;
}

std::optional<int> NetworkDescriptor::FirstBarrierInside(int i, int j) const {
  auto it = barriers_.upper_bound(i);
  if (it != barriers_.end() && *it < j) return *it;
  return std::nullopt;
}

bool NetworkDescriptor::SegmentRespectsSkipAdds(int i, int j) const {
  return !FirstCrossedSpan(i, j).has_value();
}

std::optional<SkipAddSpan> NetworkDescriptor::FirstCrossedSpan(int i,
                                                               int j) const {
  for (const SkipAddSpan& span : spans_) {
    const bool start_inside = span.start < i && i < span.end;
    const bool end_inside = span.start < j && j < span.end;
    const bool start_outside = i < span.start;
    const bool end_outside = j > span.end;
    if ((start_outside && end_inside) || (start_inside && end_outside)) {
      return span;
    }
  }
  return std::nullopt;
}

bool NetworkDescriptor::has_all_shapes() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const LayerDescriptor& l) { return l.in_shape.has_value(); });
}

bool NetworkDescriptor::has_all_norms() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const LayerDescriptor& l) { return l.l1_norm.has_value(); });
}

std::set<int> ComputeIrreducible(const NetworkDescriptor& net) {
  std::set<int> result;
  for (const LayerDescriptor& layer : net.layers()) {
    if (!layer.in_shape) {
      Fail(ErrorCode::kSchemaViolation,
           LayerTag(layer) + ": missing shapes, cannot compute irreducible set");
    }
    if (ShapeChanges(layer)) result.insert(layer.index);
  }
  return result;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T Require(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) {
    Fail(ErrorCode::kSchemaViolation, where + ": missing field \"" + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    Fail(ErrorCode::kSchemaViolation, where + ": field \"" + key + "\" has the wrong type");
  }
}

FeatureShape ParseShape(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 3) {
    Fail(ErrorCode::kSchemaViolation, where + ": shape must be [c, h, w]");
  }
  for (const json& v : value) {
    if (!v.is_number_integer()) {
      Fail(ErrorCode::kSchemaViolation, where + ": shape entries must be integers");
    }
  }
  return {value[0].get<int>(), value[1].get<int>(), value[2].get<int>()};
}

std::optional<double> ParseNorm(const json& layer, const std::string& where) {
  auto it = layer.find("l1_norm");
  if (it == layer.end() || it->is_null()) return std::nullopt;
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    const std::string text = it->get<std::string>();
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      Fail(ErrorCode::kSchemaViolation, where + ": l1_norm \"" + text + "\" is not a decimal");
    }
    return value;
  }
  Fail(ErrorCode::kSchemaViolation, where + ": l1_norm must be a number or decimal string");
}

ConvKind ParseKind(const std::string& text, const std::string& where) {
  if (text == "standard-conv") return ConvKind::kStandard;
  if (text == "depthwise-conv") return ConvKind::kDepthwise;
  Fail(ErrorCode::kSchemaViolation, where + ": unknown kind \"" + text + "\"");
}

}  // namespace

NetworkDescriptor ParseNetwork(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kSchemaViolation, std::string("descriptor is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) Fail(ErrorCode::kSchemaViolation, "descriptor must be an object");

  const std::string name = doc.value("name", std::string{});
  const json layers_json = Require<json>(doc, "layers", "descriptor");
  if (!layers_json.is_array()) {
    Fail(ErrorCode::kSchemaViolation, "descriptor: \"layers\" must be an array");
  }

  std::vector<LayerDescriptor> layers;
  std::set<int> seen;
  for (const json& entry : layers_json) {
    if (!entry.is_object()) Fail(ErrorCode::kSchemaViolation, "layer entries must be objects");
    LayerDescriptor layer;
    layer.index = Require<int>(entry, "index", "layer");
    const std::string where = "layer " + std::to_string(layer.index);
    if (!seen.insert(layer.index).second) {
      Fail(ErrorCode::kIndexOutOfRange, where + ": duplicate index");
    }
    layer.kind = ParseKind(Require<std::string>(entry, "kind", where), where);
    layer.kernel_size = Require<int>(entry, "kernel_size", where);
    layer.stride = Require<int>(entry, "stride", where);
    layer.in_channels = Require<int>(entry, "in_channels", where);
    layer.out_channels = Require<int>(entry, "out_channels", where);
    layer.groups = Require<int>(entry, "groups", where);
    if (entry.contains("in_shape") || entry.contains("out_shape")) {
      layer.in_shape = ParseShape(Require<json>(entry, "in_shape", where), where);
      layer.out_shape = ParseShape(Require<json>(entry, "out_shape", where), where);
    }
    layer.l1_norm = ParseNorm(entry, where);
    layer.has_activation_after = entry.value("has_activation_after", false);
    layers.push_back(std::move(layer));
  }

  std::optional<std::set<int>> irreducible;
  if (doc.contains("irreducible")) {
    irreducible = Require<std::set<int>>(doc, "irreducible", "descriptor");
  }
  std::set<int> barriers;
  if (doc.contains("barriers")) {
    barriers = Require<std::set<int>>(doc, "barriers", "descriptor");
  }
  std::vector<SkipAddSpan> spans;
  if (doc.contains("skip_add_spans")) {
    for (const auto& pair :
         Require<std::vector<std::vector<int>>>(doc, "skip_add_spans", "descriptor")) {
      if (pair.size() != 2) {
        Fail(ErrorCode::kSchemaViolation, "skip_add_spans entries must be [s, e]");
      }
      spans.push_back({pair[0], pair[1]});
    }
  }
  return NetworkDescriptor(name, std::move(layers), std::move(irreducible),
                           std::move(barriers), std::move(spans));
}

NetworkDescriptor LoadNetwork(const std::filesystem::path& path) {
  return ParseNetwork(internal::ReadTextFile(path));
}

std::string NetworkToJson(const NetworkDescriptor& net) {
  json layers = json::array();
  for (const LayerDescriptor& l : net.layers()) {
    json entry = {
        {"index", l.index},
        {"kind", l.depthwise() ? "depthwise-conv" : "standard-conv"},
        {"kernel_size", l.kernel_size},
        {"stride", l.stride},
        {"in_channels", l.in_channels},
        {"out_channels", l.out_channels},
        {"groups", l.groups},
        {"has_activation_after", l.has_activation_after},
    };
    if (l.in_shape) {
      entry["in_shape"] = {l.in_shape->channels, l.in_shape->height, l.in_shape->width};
      entry["out_shape"] = {l.out_shape->channels, l.out_shape->height, l.out_shape->width};
    }
    if (l.l1_norm) entry["l1_norm"] = *l.l1_norm;
    layers.push_back(std::move(entry));
  }
  json spans = json::array();
  for (const SkipAddSpan& s : net.skip_add_spans()) spans.push_back({s.start, s.end});
  json doc = {
      {"name", net.name()},
      {"layers", std::move(layers)},
      {"irreducible", net.irreducible()},
      {"barriers", net.barriers()},
      {"skip_add_spans", std::move(spans)},
  };
  return doc.dump(2) + "\n";
}

}  // namespace depthforge
