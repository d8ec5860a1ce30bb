// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sv2v/image.hpp"
#include "sv2v/scheduler.hpp"
#include "sv2v/shortcut.hpp"
#include "sv2v/teacher.hpp"

namespace sv2v::analysis {

/// Pearson correlation of two equally sized sequences; nullopt when either has
/// zero variance.
std::optional<double> pearson(const Tensor& x, const Tensor& y);

struct PairStats {
  double cc = 0.0;
  double norm_rmse = 0.0;  // RMSE after z-scoring each map
};
std::optional<PairStats> pair_stats(const Tensor& x, const Tensor& y);

struct RedundancyStats {
  double cc = 0.0;         // mean over counted pairs
  double norm_rmse = 0.0;  // mean over counted pairs
  int pair_count = 0;
  int skipped = 0;  // zero-variance pairs
};

/// Needs at least 2 pairs; pairs with a constant map are skipped and counted.
RedundancyStats redundancy_stats(const std::vector<std::pair<Tensor, Tensor>>& pairs);

struct LayerRedundancy {
  std::string layer;
  RedundancyStats adjacent;
  RedundancyStats random;
};

struct RedundancyReport {
  std::vector<LayerRedundancy> layers;

  /// mean over layers of (adjacent cc - random cc)
  double mean_margin() const;
  nlohmann::json to_json() const;
};

/// Per-layer statistics of teacher activations. Adjacent pairs are (t, t+1)
/// within a video; random pairs take frames from two different videos (or,
/// with a single video, two frames at least half its length apart).
RedundancyReport teacher_redundancy(const std::vector<std::vector<Tensor>>& videos,
                                    const TeacherGenerator& teacher, int random_pairs,
                                    std::uint64_t seed);

struct CostReport {
  std::uint64_t macs_full_frame = 0;
  std::uint64_t macs_shortcut_frame = 0;
  std::uint64_t macs_replaced_segment = 0;
  std::uint64_t macs_shortcut_block = 0;
  std::uint64_t macs_shortcut_block_exclusive = 0;
  std::uint64_t macs_reference_prep = 0;  // per keyframe interval, see ShortcutBlock::reduce_reference
  std::uint64_t params_teacher = 0;
  std::uint64_t params_shortcut = 0;

  /// Mean per-frame MACs with one full pass every alpha frames; the reference
  /// preparation is paid once per interval when alpha > 1.
  double mean_frame_macs(int alpha) const;
  /// full-frame MACs over mean per-frame MACs; 1 at alpha = 1, grows with alpha.
  double savings_ratio(int alpha) const;
  /// Reciprocal of savings_ratio: falls toward shortcut/full as alpha grows.
  double cost_fraction(int alpha) const;

  nlohmann::json to_json(const std::vector<int>& alphas) const;
};

CostReport cost_report(const TeacherGenerator& teacher, const ShortcutBlock& shortcut,
                       const TeacherSplit& split, const Shape& frame_shape);

enum class OverlayVariant { global, global_local };

struct Point {
  double y = 0.0;
  double x = 0.0;
};

/// Output points and their kernel sampling points in frame pixel coordinates.
/// Feature position (i, j) maps to (i * scale, j * scale) with
/// scale = frame_h / feature_h. Global offsets live on a coarser grid and are
/// scaled by frame_h / global_h.
struct OverlayGeometry {
  double scale = 1.0;
  double global_scale = 1.0;
  int kernel = 3;
  std::vector<Point> outputs;
  std::vector<Point> sampled;  // kernel^2 entries per output point
};

/// global_offsets [1, 2, Hg, Wg]; local_offsets [1, 2 * k^2, H, W] (required for
/// the global_local variant).
OverlayGeometry overlay_geometry(int frame_h, int frame_w, const Tensor& global_offsets,
                                 const Tensor& local_offsets, int feature_h, int feature_w,
                                 int kernel, int stride, OverlayVariant variant);

/// Frame with output points in green and sampling points in red, enlarged by
/// `magnify`.
image::Image render_overlay(const Tensor& frame, const OverlayGeometry& geom, int magnify = 4);

void export_offset_overlay(const std::string& path, const Tensor& frame,
                           const Tensor& global_offsets, const Tensor& local_offsets, int kernel,
                           int stride, OverlayVariant variant, int magnify = 4);

/// Mean over the sampling-point axis of a [1, N_p, H, W] mask, 0 -> black, 1 -> white.
image::Image mask_heatmap(const Tensor& mask);
void export_mask_heatmap(const std::string& path, const Tensor& mask);

}  // namespace sv2v::analysis
