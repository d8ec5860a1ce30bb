// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sv2v/tensor.hpp"

namespace sv2v::image {

/// 8-bit interleaved image, 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int width, int height, int channels, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

/// [-1, 1] -> {0..255}: q = round((v + 1) * 127.5), clamped.
std::uint8_t quantize(double v);
double dequantize(std::uint8_t q);

/// Accepts [1, C, H, W] or [C, H, W] with C in {1, 3}.
Image from_tensor(const Tensor& t);
/// Returns [1, C, H, W].
Tensor to_tensor(const Image& img);

/// Nearest-neighbour enlargement by an integer factor.
Image magnify(const Image& img, int factor);

}  // namespace sv2v::image
