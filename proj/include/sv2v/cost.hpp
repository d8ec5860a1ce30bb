// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sv2v/tensor.hpp"

namespace sv2v::cost {

enum class LayerKind { conv, conv_transpose, deform_conv, adabd, resize };

/// One layer of a network description. Spatial sizes are resolved at count time:
/// the layer's input is ceil(H / in_div) x ceil(W / in_div) of the described input.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int output_padding = 0;
  int in_div = 1;
  int out_div = 1;  // resize only
  bool auxiliary = false;  // offset / mask generator
};

struct NetworkDescription {
  std::string name;
  std::vector<LayerSpec> layers;

  NetworkDescription& append(const NetworkDescription& other);
};

/// Per-layer and total multiply-accumulate counts.
///
/// Cost model:
///  * conv: C_out * C_in * k^2 * H_out * W_out
///  * conv_transpose: C_out * C_in * k^2 * H_in * W_in (one kernel scatter per input)
///  * deform_conv: conv term + 4 * C_in * k^2 * H * W for bilinear sampling
///  * adabd: conv term + (4 + 2) * C_in * k^2 * H * W (sampling plus two-way blend)
///  * resize: 4 * C * H_out * W_out
/// The exclusive total drops auxiliary layers and the sampling/blend terms.
struct LayerCount {
  std::string name;
  std::uint64_t core = 0;
  std::uint64_t sampling = 0;
  bool auxiliary = false;
  std::uint64_t total() const { return core + sampling; }
};

struct MacCount {
  std::uint64_t inclusive = 0;
  std::uint64_t exclusive = 0;
  std::vector<LayerCount> layers;
};

/// input_shape is [B, C, H, W] of the tensor the description's in_div refers to.
MacCount count_macs(const NetworkDescription& net, const Shape& input_shape);

LayerKind layer_kind_from_string(const std::string& s);
std::string to_string(LayerKind kind);

nlohmann::json to_json(const NetworkDescription& net);
NetworkDescription description_from_json(const nlohmann::json& j);

}  // namespace sv2v::cost
