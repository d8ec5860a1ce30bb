// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sv2v/checkpoint.hpp"
#include "sv2v/cost.hpp"
#include "sv2v/nn.hpp"

namespace sv2v {

enum class Dependence { low, medium, high };

Dependence dependence_from_string(std::string_view s);
std::string to_string(Dependence d);

/// Where the shortcut cuts into the teacher: a_t is the output of
/// `encoder_layer`, f_t is the input of `decoder_layer`. The replaced segment is
/// the layers strictly between them.
struct TeacherSplit {
  int encoder_layer = 1;
  int decoder_layer = 10;
  Dependence level = Dependence::medium;

  static TeacherSplit for_level(Dependence level);
};

/// Toy encoder/residual/decoder translator: input layer, 2 downsampling
/// stages, 6 residual blocks, 2 upsampling stages, output layer.
class TeacherGenerator {
 public:
  static constexpr int kNumLayers = 12;

  explicit TeacherGenerator(int base_width = 32, std::uint64_t seed = 0, int in_channels = 3,
                            int out_channels = 3);

  static const std::array<std::string_view, kNumLayers>& layer_names();
  /// Index of a layer by name; throws std::invalid_argument on unknown names.
  static int layer_index(std::string_view name);

  int base_width() const { return base_width_; }
  int layer_out_channels(int layer) const;
  /// Spatial divisor of a layer's output relative to the input frame.
  static int layer_out_div(int layer);

  Var run_layer(int layer, const Var& x) const;
  Var forward(const Var& frame) const;
  /// Layers [0, l_e].
  Var encode_to(const Var& frame, int l_e) const;
  /// Layers (l_e, l_d): the segment a shortcut replaces.
  Var middle_to(const Var& a, int l_e, int l_d) const;
  /// Layers [l_d, end).
  Var decode_from(const Var& f, int l_d) const;

  Tensor forward(const Tensor& frame) const { return forward(constant(frame)).value(); }

  std::vector<NamedParam> parameters() const;
  void set_trainable(bool trainable) const;

  /// Layers [first, last] with in_div relative to the input frame.
  cost::NetworkDescription describe(int first = 0, int last = kNumLayers - 1) const;

  Checkpoint to_checkpoint() const;
  static TeacherGenerator from_checkpoint(const Checkpoint& ckpt);

 private:
  void check_layer(int layer, const char* what) const;

  int base_width_;
  int in_channels_;
  int out_channels_;
  nn::Conv2d input_;
  nn::Conv2d down1_, down2_;
  std::array<nn::Conv2d, 12> res_;  // two convolutions per residual block
  nn::ConvTranspose2d up1_, up2_;
  nn::Conv2d output_;
};

}  // namespace sv2v
