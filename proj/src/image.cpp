// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace sv2v::image {

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {
  SV2V_CHECK(w > 0 && h > 0, "image dimensions must be positive");
  SV2V_CHECK(c == 1 || c == 3, "images have 1 or 3 channels");
}

void write_png(const std::string& path, const Image& img) {
  SV2V_CHECK(img.pixels.size() == static_cast<std::size_t>(img.width) * img.height * img.channels,
             "image buffer does not match its dimensions");
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&pi, path.c_str(), 0, img.pixels.data(), 0, nullptr))
    throw IoError("cannot write PNG '" + path + "': " + pi.message);
}

Image read_png(const std::string& path) {
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.c_str()))
    throw IoError("cannot read PNG '" + path + "': " + pi.message);
  const bool gray = (pi.format & PNG_FORMAT_FLAG_COLOR) == 0;
  pi.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Image img(static_cast<int>(pi.width), static_cast<int>(pi.height), gray ? 1 : 3);
  if (!png_image_finish_read(&pi, nullptr, img.pixels.data(), 0, nullptr)) {
    png_image_free(&pi);
    throw IoError("cannot decode PNG '" + path + "': " + pi.message);
  }
  return img;
}

std::uint8_t quantize(double v) {
  const double q = std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
  return static_cast<std::uint8_t>(q);
}

double dequantize(std::uint8_t q) { return q / 127.5 - 1.0; }

Image from_tensor(const Tensor& t) {
  SV2V_CHECK(t.ndim() == 3 || (t.ndim() == 4 && t.dim(0) == 1),
             "image conversion expects [1, C, H, W] or [C, H, W]");
  const int c = t.dim(-3), h = t.dim(-2), w = t.dim(-1);
  Image img(w, h, c);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.at(x, y, ch) = quantize(t[(static_cast<std::size_t>(ch) * h + y) * w + x]);
  return img;
}

Tensor to_tensor(const Image& img) {
  Tensor t({1, img.channels, img.height, img.width});
  for (int ch = 0; ch < img.channels; ++ch)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        t[(static_cast<std::size_t>(ch) * img.height + y) * img.width + x] = dequantize(img.at(x, y, ch));
  return t;
}

Image magnify(const Image& img, int factor) {
  SV2V_CHECK(factor >= 1, "magnification factor must be >= 1");
  Image out(img.width * factor, img.height * factor, img.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x / factor, y / factor, c);
  return out;
}

}  // namespace sv2v::image
