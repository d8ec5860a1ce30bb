// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sv2v/autograd.hpp"

namespace sv2v::nn {

/// Uniform(-b, b) with b = gain * sqrt(3 / fan_in), fan_in = shape[1] * prod(shape[2:]).
Tensor kaiming_uniform(const Shape& shape, std::mt19937_64& rng, double gain = 1.0);

struct Conv2d {
  Var weight;  // [Co, C, k, k]
  Var bias;    // [Co] or undefined
  int stride = 1;
  int padding = 0;

  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int padding, bool with_bias,
         std::mt19937_64& rng, double gain = 1.0);
  Var operator()(const Var& x) const;
  void zero_init();
  void append_params(const std::string& prefix, std::vector<NamedParam>& out) const;
};

struct ConvTranspose2d {
  Var weight;  // [C, Co, k, k]
  Var bias;
  int stride = 2;
  int padding = 1;
  int output_padding = 1;

  ConvTranspose2d() = default;
  ConvTranspose2d(int in_ch, int out_ch, int kernel, int stride, int padding, int output_padding,
                  std::mt19937_64& rng, double gain = 1.0);
  Var operator()(const Var& x) const;
  void append_params(const std::string& prefix, std::vector<NamedParam>& out) const;
};

struct Conv3d {
  Var weight;  // [Co, C, kd, kh, kw]
  Var bias;
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> padding{0, 0, 0};

  Conv3d() = default;
  Conv3d(int in_ch, int out_ch, std::array<int, 3> kernel, std::array<int, 3> stride,
         std::array<int, 3> padding, std::mt19937_64& rng, double gain = 1.0);
  Var operator()(const Var& x) const;
  void append_params(const std::string& prefix, std::vector<NamedParam>& out) const;
};

/// Marks every parameter as frozen (no gradient) or trainable.
void set_trainable(const std::vector<NamedParam>& params, bool trainable);

std::size_t count_params(const std::vector<NamedParam>& params);

/// CRC-32 over the raw bytes of every parameter value, in order.
std::uint32_t params_checksum(const std::vector<NamedParam>& params);

}  // namespace sv2v::nn
