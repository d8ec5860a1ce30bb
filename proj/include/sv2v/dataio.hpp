// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sv2v/tensor.hpp"

namespace sv2v::data {

enum class Task { color_invert, edge_to_fill };
Task task_from_string(std::string_view s);
std::string to_string(Task t);

struct SyntheticVideoSpec {
  int num_frames = 12;
  int height = 64;
  int width = 128;
  double motion_px_per_frame = 1.0;
  int num_shapes = 4;
  std::uint64_t seed = 0;
  Task task = Task::color_invert;

  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticVideoSpec from_json(const nlohmann::json& j);
};

/// Frames are [1, 3, H, W] in [-1, 1].
struct VideoRecord {
  std::vector<Tensor> frames;
  nlohmann::json manifest;  // generation spec, role and (once saved) checksum
};

struct VideoPair {
  VideoRecord source;
  VideoRecord target;
};

/// Camera pan over an analytic texture plus anti-aliased moving shapes. The
/// background moves `motion_px_per_frame` pixels left per frame and each shape
/// drifts at the same speed in its own direction. Targets are the negated
/// source (color_invert) or, for edge_to_fill, sources show shape outlines and
/// targets the filled shapes.
VideoPair generate_video(const SyntheticVideoSpec& spec);

/// `count` videos with seeds spec.seed + i, generated in parallel.
std::vector<VideoPair> generate_dataset(const SyntheticVideoSpec& spec, int count);

enum class FrameFormat { png, raw };
FrameFormat frame_format_from_string(std::string_view s);
std::string to_string(FrameFormat f);

/// Writes frame_0000.<png|raw>... plus manifest.json carrying the frame count,
/// shape, format and a crc32 over the frame files in order.
void save_video(const VideoRecord& record, const std::string& dir, FrameFormat format = FrameFormat::png);
/// Verifies the manifest and checksum; throws IoError on any inconsistency.
VideoRecord load_video(const std::string& dir);

/// Raw container: "SV2VRAW1", u32 dtype tag (1 = f32, 2 = f64), u32 ndim,
/// u32 dims, little-endian payload.
enum class RawDtype : std::uint32_t { f32 = 1, f64 = 2 };
void write_raw(const std::string& path, const Tensor& t, RawDtype dtype = RawDtype::f32);
Tensor read_raw(const std::string& path);

}  // namespace sv2v::data
