// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/cost.hpp"

namespace sv2v::cost {

namespace {

int div_ceil(int v, int d) { return (v + d - 1) / d; }

}  // namespace

NetworkDescription& NetworkDescription::append(const NetworkDescription& other) {
  layers.insert(layers.end(), other.layers.begin(), other.layers.end());
  return *this;
}

MacCount count_macs(const NetworkDescription& net, const Shape& input_shape) {
  SV2V_CHECK(input_shape.size() == 4, "count_macs: input shape must be [B, C, H, W]");
  const std::uint64_t batch = input_shape[0];
  const int H = input_shape[2], W = input_shape[3];
  MacCount out;
  for (const LayerSpec& l : net.layers) {
    SV2V_CHECK(l.in_div >= 1 && l.out_div >= 1 && l.kernel >= 1 && l.stride >= 1,
               "count_macs: invalid geometry in layer '" + l.name + "'");
    const std::uint64_t hi = div_ceil(H, l.in_div), wi = div_ceil(W, l.in_div);
    const std::uint64_t k2 = static_cast<std::uint64_t>(l.kernel) * l.kernel;
    const std::uint64_t cin = l.in_channels, cout = l.out_channels;
    LayerCount c{l.name, 0, 0, l.auxiliary};
    switch (l.kind) {
      case LayerKind::conv: {
        const std::uint64_t ho = (hi + 2 * l.padding - l.kernel) / l.stride + 1;
        const std::uint64_t wo = (wi + 2 * l.padding - l.kernel) / l.stride + 1;
        c.core = cout * cin * k2 * ho * wo;
        break;
      }
      case LayerKind::conv_transpose:
        c.core = cout * cin * k2 * hi * wi;
        break;
      case LayerKind::deform_conv:
        c.core = cout * cin * k2 * hi * wi;
        c.sampling = 4 * cin * k2 * hi * wi;
        break;
      case LayerKind::adabd:
        c.core = cout * cin * k2 * hi * wi;
        c.sampling = 6 * cin * k2 * hi * wi;
        break;
      case LayerKind::resize:
        c.sampling = 4 * cin * static_cast<std::uint64_t>(div_ceil(H, l.out_div)) *
                     div_ceil(W, l.out_div);
        break;
    }
    c.core *= batch;
    c.sampling *= batch;
    out.inclusive += c.total();
    if (!c.auxiliary) out.exclusive += c.core;
    out.layers.push_back(std::move(c));
  }
  return out;
}

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "conv") return LayerKind::conv;
  if (s == "conv_transpose") return LayerKind::conv_transpose;
  if (s == "deform_conv") return LayerKind::deform_conv;
  if (s == "adabd") return LayerKind::adabd;
  if (s == "resize") return LayerKind::resize;
  throw std::invalid_argument("unknown layer type '" + s + "'");
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::conv_transpose: return "conv_transpose";
    case LayerKind::deform_conv: return "deform_conv";
    case LayerKind::adabd: return "adabd";
    case LayerKind::resize: return "resize";
  }
  return "conv";
}

nlohmann::json to_json(const NetworkDescription& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers)
    layers.push_back({{"name", l.name},
                      {"type", to_string(l.kind)},
                      {"in_channels", l.in_channels},
                      {"out_channels", l.out_channels},
                      {"kernel", l.kernel},
                      {"stride", l.stride},
                      {"padding", l.padding},
                      {"output_padding", l.output_padding},
                      {"in_div", l.in_div},
                      {"out_div", l.out_div},
                      {"auxiliary", l.auxiliary}});
  return {{"name", net.name}, {"layers", layers}};
}

NetworkDescription description_from_json(const nlohmann::json& j) {
  NetworkDescription net;
  net.name = j.value("name", "");
  for (const auto& e : j.at("layers")) {
    LayerSpec l;
    l.name = e.value("name", "");
    l.kind = layer_kind_from_string(e.at("type").get<std::string>());
    l.in_channels = e.at("in_channels").get<int>();
    l.out_channels = e.value("out_channels", l.in_channels);
    l.kernel = e.value("kernel", 1);
    l.stride = e.value("stride", 1);
    l.padding = e.value("padding", 0);
    l.output_padding = e.value("output_padding", 0);
    l.in_div = e.value("in_div", 1);
    l.out_div = e.value("out_div", 1);
    l.auxiliary = e.value("auxiliary", false);
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace sv2v::cost
