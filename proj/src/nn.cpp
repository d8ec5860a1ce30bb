// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/nn.hpp"

#include <zlib.h>

#include <cmath>

#include "sv2v/ops.hpp"

namespace sv2v::nn {

Tensor kaiming_uniform(const Shape& shape, std::mt19937_64& rng, double gain) {
  SV2V_CHECK(shape.size() >= 2, "kaiming_uniform needs at least 2 dims");
  double fan_in = shape[1];
  for (std::size_t i = 2; i < shape.size(); ++i) fan_in *= shape[i];
  const double bound = gain * std::sqrt(3.0 / fan_in);
  return Tensor::uniform(shape, rng, -bound, bound);
}

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride_, int padding_, bool with_bias,
               std::mt19937_64& rng, double gain)
    : weight(parameter(kaiming_uniform({out_ch, in_ch, kernel, kernel}, rng, gain))),
      stride(stride_),
      padding(padding_) {
  if (with_bias) bias = parameter(Tensor::zeros({out_ch}));
}

Var Conv2d::operator()(const Var& x) const { return conv2d(x, weight, bias, stride, padding); }

void Conv2d::zero_init() {
  weight.mutable_value().fill(0.0);
  if (bias.defined()) bias.mutable_value().fill(0.0);
}

void Conv2d::append_params(const std::string& prefix, std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

ConvTranspose2d::ConvTranspose2d(int in_ch, int out_ch, int kernel, int stride_, int padding_,
                                 int output_padding_, std::mt19937_64& rng, double gain)
    : weight(parameter(kaiming_uniform({out_ch, in_ch, kernel, kernel}, rng, gain)
                           .reshaped({in_ch, out_ch, kernel, kernel}))),
      bias(parameter(Tensor::zeros({out_ch}))),
      stride(stride_),
      padding(padding_),
      output_padding(output_padding_) {}

Var ConvTranspose2d::operator()(const Var& x) const {
  return conv_transpose2d(x, weight, bias, stride, padding, output_padding);
}

void ConvTranspose2d::append_params(const std::string& prefix, std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Conv3d::Conv3d(int in_ch, int out_ch, std::array<int, 3> kernel, std::array<int, 3> stride_,
               std::array<int, 3> padding_, std::mt19937_64& rng, double gain)
    : weight(parameter(kaiming_uniform({out_ch, in_ch, kernel[0], kernel[1], kernel[2]}, rng, gain))),
      bias(parameter(Tensor::zeros({out_ch}))),
      stride(stride_),
      padding(padding_) {}

Var Conv3d::operator()(const Var& x) const { return conv3d(x, weight, bias, stride, padding); }

void Conv3d::append_params(const std::string& prefix, std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

void set_trainable(const std::vector<NamedParam>& params, bool trainable) {
  for (const auto& p : params) {
    Var v = p.var;
    v.set_requires_grad(trainable);
    if (!trainable) v.zero_grad();
  }
}

std::size_t count_params(const std::vector<NamedParam>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var.value().size();
  return n;
}

std::uint32_t params_checksum(const std::vector<NamedParam>& params) {
  uLong crc = crc32(0L, Z_NULL, 0);
  for (const auto& p : params) {
    const Tensor& t = p.var.value();
    crc = crc32(crc, reinterpret_cast<const Bytef*>(t.data()),
                static_cast<uInt>(t.size() * sizeof(double)));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace sv2v::nn
