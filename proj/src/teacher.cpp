// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/teacher.hpp"

#include <cmath>

#include "sv2v/ops.hpp"

namespace sv2v {

namespace {

constexpr std::array<std::string_view, TeacherGenerator::kNumLayers> kLayerNames = {
    "input", "down1", "down2", "res1", "res2", "res3",
    "res4",  "res5",  "res6",  "up1",  "up2",  "output"};

constexpr int kFirstRes = 3;
constexpr int kLastRes = 8;

}  // namespace

Dependence dependence_from_string(std::string_view s) {
  if (s == "low") return Dependence::low;
  if (s == "medium") return Dependence::medium;
  if (s == "high") return Dependence::high;
  throw std::invalid_argument("unknown dependence level '" + std::string(s) +
                              "' (expected low, medium or high)");
}

std::string to_string(Dependence d) {
  switch (d) {
    case Dependence::low: return "low";
    case Dependence::medium: return "medium";
    case Dependence::high: return "high";
  }
  return "medium";
}

TeacherSplit TeacherSplit::for_level(Dependence level) {
  switch (level) {
    case Dependence::low: return {0, 11, level};    // everything between input and output layers
    case Dependence::medium: return {1, 10, level};  // down2 .. up1
    case Dependence::high: return {2, 9, level};     // the residual stack
  }
  return {};
}

TeacherGenerator::TeacherGenerator(int base_width, std::uint64_t seed, int in_channels,
                                   int out_channels)
    : base_width_(base_width), in_channels_(in_channels), out_channels_(out_channels) {
  SV2V_CHECK(base_width >= 1 && in_channels >= 1 && out_channels >= 1,
             "teacher widths must be positive");
  std::mt19937_64 rng(seed);
  const int w = base_width;
  const double relu_gain = std::sqrt(2.0);
  input_ = nn::Conv2d(in_channels, w, 7, 1, 3, true, rng, relu_gain);
  down1_ = nn::Conv2d(w, 2 * w, 3, 2, 1, true, rng, relu_gain);
  down2_ = nn::Conv2d(2 * w, 4 * w, 3, 2, 1, true, rng, relu_gain);
  for (int i = 0; i < 6; ++i) {
    res_[2 * i] = nn::Conv2d(4 * w, 4 * w, 3, 1, 1, true, rng, relu_gain);
    res_[2 * i + 1] = nn::Conv2d(4 * w, 4 * w, 3, 1, 1, true, rng, 0.3);
  }
  up1_ = nn::ConvTranspose2d(4 * w, 2 * w, 3, 2, 1, 1, rng, 2.0 * relu_gain);
  up2_ = nn::ConvTranspose2d(2 * w, w, 3, 2, 1, 1, rng, 2.0 * relu_gain);
  output_ = nn::Conv2d(w, out_channels, 7, 1, 3, true, rng, 1.0);
}

const std::array<std::string_view, TeacherGenerator::kNumLayers>& TeacherGenerator::layer_names() {
  return kLayerNames;
}

int TeacherGenerator::layer_index(std::string_view name) {
  for (int i = 0; i < kNumLayers; ++i)
    if (kLayerNames[i] == name) return i;
  throw std::invalid_argument("unknown teacher layer '" + std::string(name) + "'");
}

int TeacherGenerator::layer_out_channels(int layer) const {
  check_layer(layer, "layer_out_channels");
  if (layer == 0 || layer == 10) return base_width_;
  if (layer == 1 || layer == 9) return 2 * base_width_;
  if (layer == 11) return out_channels_;
  return 4 * base_width_;
}

int TeacherGenerator::layer_out_div(int layer) {
  SV2V_CHECK(layer >= 0 && layer < kNumLayers, "layer index out of range");
  if (layer == 0 || layer >= 10) return 1;
  if (layer == 1 || layer == 9) return 2;
  return 4;
}

void TeacherGenerator::check_layer(int layer, const char* what) const {
  SV2V_CHECK(layer >= 0 && layer < kNumLayers,
             std::string(what) + ": layer index " + std::to_string(layer) + " out of range");
}

Var TeacherGenerator::run_layer(int layer, const Var& x) const {
  check_layer(layer, "run_layer");
  switch (layer) {
    case 0:
      SV2V_CHECK(x.value().ndim() == 4 && x.dim(1) == in_channels_,
                 "teacher input must have " + std::to_string(in_channels_) + " channels, got " +
                     shape_str(x.shape()));
      return relu(input_(x));
    case 1: return relu(down1_(x));
    case 2: return relu(down2_(x));
    case 9: return relu(up1_(x));
    case 10: return relu(up2_(x));
    case 11: return tanh(output_(x));
    default: {
      const int i = layer - kFirstRes;
      return add(x, res_[2 * i + 1](relu(res_[2 * i](x))));
    }
  }
}

Var TeacherGenerator::forward(const Var& frame) const {
  Var x = frame;
  for (int i = 0; i < kNumLayers; ++i) x = run_layer(i, x);
  return x;
}

Var TeacherGenerator::encode_to(const Var& frame, int l_e) const {
  check_layer(l_e, "encode_to");
  Var x = frame;
  for (int i = 0; i <= l_e; ++i) x = run_layer(i, x);
  return x;
}

Var TeacherGenerator::middle_to(const Var& a, int l_e, int l_d) const {
  check_layer(l_e, "middle_to");
  check_layer(l_d, "middle_to");
  SV2V_CHECK(l_e < l_d, "middle_to: encoder layer must precede decoder layer");
  SV2V_CHECK(a.value().ndim() == 4 && a.dim(1) == layer_out_channels(l_e),
             "middle_to: features " + shape_str(a.shape()) + " do not match layer '" +
                 std::string(kLayerNames[l_e]) + "'");
  Var x = a;
  for (int i = l_e + 1; i < l_d; ++i) x = run_layer(i, x);
  return x;
}

Var TeacherGenerator::decode_from(const Var& f, int l_d) const {
  check_layer(l_d, "decode_from");
  const int expected = l_d == 0 ? in_channels_ : layer_out_channels(l_d - 1);
  SV2V_CHECK(f.value().ndim() == 4 && f.dim(1) == expected,
             "decode_from: layer '" + std::string(kLayerNames[l_d]) + "' expects " +
                 std::to_string(expected) + " channels, got " + shape_str(f.shape()));
  Var x = f;
  for (int i = l_d; i < kNumLayers; ++i) x = run_layer(i, x);
  return x;
}

std::vector<NamedParam> TeacherGenerator::parameters() const {
  std::vector<NamedParam> out;
  input_.append_params("input", out);
  down1_.append_params("down1", out);
  down2_.append_params("down2", out);
  for (int i = 0; i < 6; ++i) {
    const std::string name = "res" + std::to_string(i + 1);
    res_[2 * i].append_params(name + ".conv1", out);
    res_[2 * i + 1].append_params(name + ".conv2", out);
  }
  up1_.append_params("up1", out);
  up2_.append_params("up2", out);
  output_.append_params("output", out);
  return out;
}

void TeacherGenerator::set_trainable(bool trainable) const {
  nn::set_trainable(parameters(), trainable);
}

cost::NetworkDescription TeacherGenerator::describe(int first, int last) const {
  check_layer(first, "describe");
  check_layer(last, "describe");
  cost::NetworkDescription net;
  net.name = "teacher[" + std::string(kLayerNames[first]) + ".." + std::string(kLayerNames[last]) + "]";
  for (int i = first; i <= last; ++i) {
    const int in_div = i == 0 ? 1 : layer_out_div(i - 1);
    const int cin = i == 0 ? in_channels_ : layer_out_channels(i - 1);
    const int cout = layer_out_channels(i);
    const std::string name(kLayerNames[i]);
    using cost::LayerKind;
    switch (i) {
      case 0:
      case 11: net.layers.push_back({name, LayerKind::conv, cin, cout, 7, 1, 3, 0, in_div}); break;
      case 1:
      case 2: net.layers.push_back({name, LayerKind::conv, cin, cout, 3, 2, 1, 0, in_div}); break;
      case 9:
      case 10:
        net.layers.push_back({name, LayerKind::conv_transpose, cin, cout, 3, 2, 1, 1, in_div});
        break;
      default:
        net.layers.push_back({name + ".conv1", LayerKind::conv, cin, cout, 3, 1, 1, 0, in_div});
        net.layers.push_back({name + ".conv2", LayerKind::conv, cout, cout, 3, 1, 1, 0, in_div});
    }
  }
  return net;
}

Checkpoint TeacherGenerator::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.config["kind"] = "teacher";
  ckpt.config["base_width"] = std::to_string(base_width_);
  ckpt.config["in_channels"] = std::to_string(in_channels_);
  ckpt.config["out_channels"] = std::to_string(out_channels_);
  ckpt.arrays = snapshot(parameters());
  return ckpt;
}

TeacherGenerator TeacherGenerator::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.value("kind") != "teacher") throw IoError("checkpoint is not a teacher checkpoint");
  TeacherGenerator t(std::stoi(ckpt.value("base_width")), 0, std::stoi(ckpt.value("in_channels")),
                     std::stoi(ckpt.value("out_channels")));
  restore(t.parameters(), ckpt);
  return t;
}

}  // namespace sv2v
