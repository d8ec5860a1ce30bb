// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sv2v::analysis {
namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const Tensor& t) {
  Moments m;
  const double n = static_cast<double>(t.size());
  for (double v : t.values()) m.mean += v;
  m.mean /= n;
  double ss = 0.0;
  for (double v : t.values()) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / n);
  return m;
}

// Relative threshold so that rounding noise on a constant map is not mistaken
// for variance.
bool is_constant(const Moments& m) { return !(m.sd > 1e-12 * std::max(1.0, std::abs(m.mean))); }

}  // namespace

std::optional<double> pearson(const Tensor& x, const Tensor& y) {
  SV2V_CHECK(x.size() == y.size() && !x.empty(), "pearson: inputs must be non-empty and equal-sized");
  const Moments mx = moments(x), my = moments(y);
  if (is_constant(mx) || is_constant(my)) return std::nullopt;
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx.mean) * (y[i] - my.mean);
  cov /= static_cast<double>(x.size());
  return std::clamp(cov / (mx.sd * my.sd), -1.0, 1.0);
}

std::optional<PairStats> pair_stats(const Tensor& x, const Tensor& y) {
  SV2V_CHECK(x.size() == y.size() && !x.empty(), "pair_stats: inputs must be non-empty and equal-sized");
  const Moments mx = moments(x), my = moments(y);
  if (is_constant(mx) || is_constant(my)) return std::nullopt;
  double cov = 0.0, se = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double zx = (x[i] - mx.mean) / mx.sd;
    const double zy = (y[i] - my.mean) / my.sd;
    cov += zx * zy;
    se += (zx - zy) * (zx - zy);
  }
  const double n = static_cast<double>(x.size());
  return PairStats{std::clamp(cov / n, -1.0, 1.0), std::sqrt(se / n)};
}

RedundancyStats redundancy_stats(const std::vector<std::pair<Tensor, Tensor>>& pairs) {
  SV2V_CHECK(pairs.size() >= 2, "redundancy_stats needs at least 2 pairs");
  RedundancyStats r;
  for (const auto& [x, y] : pairs) {
    const auto s = pair_stats(x, y);
    if (!s) {
      ++r.skipped;
      continue;
    }
    r.cc += s->cc;
    r.norm_rmse += s->norm_rmse;
    ++r.pair_count;
  }
  if (r.pair_count > 0) {
    r.cc /= r.pair_count;
    r.norm_rmse /= r.pair_count;
  }
  return r;
}

double RedundancyReport::mean_margin() const {
  SV2V_CHECK(!layers.empty(), "empty redundancy report");
  double s = 0.0;
  for (const auto& l : layers) s += l.adjacent.cc - l.random.cc;
  return s / static_cast<double>(layers.size());
}

nlohmann::json RedundancyReport::to_json() const {
  auto stats = [](const RedundancyStats& s) {
    return nlohmann::json{{"cc", s.cc}, {"norm_rmse", s.norm_rmse}, {"pair_count", s.pair_count},
                          {"skipped", s.skipped}};
  };
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : layers)
    j["layers"].push_back({{"layer", l.layer}, {"adjacent", stats(l.adjacent)}, {"random", stats(l.random)}});
  j["mean_margin"] = layers.empty() ? 0.0 : mean_margin();
  return j;
}

RedundancyReport teacher_redundancy(const std::vector<std::vector<Tensor>>& videos,
                                    const TeacherGenerator& teacher, int random_pairs,
                                    std::uint64_t seed) {
  SV2V_CHECK(!videos.empty(), "teacher_redundancy: no videos");
  SV2V_CHECK(random_pairs >= 2, "teacher_redundancy: need at least 2 random pairs");
  for (const auto& v : videos) SV2V_CHECK(v.size() >= 2, "teacher_redundancy: videos need >= 2 frames");

  constexpr int L = TeacherGenerator::kNumLayers;
  // acts[v][t][l]
  std::vector<std::vector<std::array<Tensor, L>>> acts(videos.size());
  for (std::size_t v = 0; v < videos.size(); ++v)
    for (const auto& frame : videos[v]) {
      auto& a = acts[v].emplace_back();
      Var x = constant(frame);
      for (int l = 0; l < L; ++l) {
        x = teacher.run_layer(l, x);
        a[l] = x.value();
      }
    }

  std::vector<std::pair<int, int>> adjacent;  // (video, t)
  for (std::size_t v = 0; v < videos.size(); ++v)
    for (std::size_t t = 0; t + 1 < videos[v].size(); ++t) adjacent.emplace_back(static_cast<int>(v), static_cast<int>(t));
  SV2V_CHECK(adjacent.size() >= 2, "teacher_redundancy: need at least 2 adjacent pairs");

  std::mt19937_64 rng(seed);
  struct Frame {
    int v, t;
  };
  std::vector<std::pair<Frame, Frame>> random;
  const int nv = static_cast<int>(videos.size());
  for (int i = 0; i < random_pairs; ++i) {
    if (nv > 1) {
      const int v0 = std::uniform_int_distribution<int>(0, nv - 1)(rng);
      int v1 = std::uniform_int_distribution<int>(0, nv - 2)(rng);
      if (v1 >= v0) ++v1;
      const int t0 = std::uniform_int_distribution<int>(0, static_cast<int>(videos[v0].size()) - 1)(rng);
      const int t1 = std::uniform_int_distribution<int>(0, static_cast<int>(videos[v1].size()) - 1)(rng);
      random.push_back({{v0, t0}, {v1, t1}});
    } else {
      const int n = static_cast<int>(videos[0].size());
      const int gap = std::max(1, n / 2);
      const int t0 = std::uniform_int_distribution<int>(0, n - 1 - gap)(rng);
      const int t1 = std::uniform_int_distribution<int>(t0 + gap, n - 1)(rng);
      random.push_back({{0, t0}, {0, t1}});
    }
  }

  RedundancyReport report;
  for (int l = 0; l < L; ++l) {
    std::vector<std::pair<Tensor, Tensor>> adj, rnd;
    for (const auto& [v, t] : adjacent) adj.emplace_back(acts[v][t][l], acts[v][t + 1][l]);
    for (const auto& [a, b] : random) rnd.emplace_back(acts[a.v][a.t][l], acts[b.v][b.t][l]);
    report.layers.push_back({std::string(TeacherGenerator::layer_names()[l]), redundancy_stats(adj),
                             redundancy_stats(rnd)});
  }
  return report;
}

double CostReport::mean_frame_macs(int alpha) const {
  SV2V_CHECK(alpha >= 1, "alpha must be >= 1");
  if (alpha == 1) return static_cast<double>(macs_full_frame);
  return (static_cast<double>(macs_full_frame) + static_cast<double>(macs_reference_prep) +
          (alpha - 1) * static_cast<double>(macs_shortcut_frame)) /
         alpha;
}

double CostReport::savings_ratio(int alpha) const {
  return static_cast<double>(macs_full_frame) / mean_frame_macs(alpha);
}

double CostReport::cost_fraction(int alpha) const { return 1.0 / savings_ratio(alpha); }

nlohmann::json CostReport::to_json(const std::vector<int>& alphas) const {
  nlohmann::json j{{"macs_full_frame", macs_full_frame},
                   {"macs_shortcut_frame", macs_shortcut_frame},
                   {"macs_replaced_segment", macs_replaced_segment},
                   {"macs_shortcut_block", macs_shortcut_block},
                   {"macs_shortcut_block_exclusive", macs_shortcut_block_exclusive},
                   {"macs_reference_prep", macs_reference_prep},
                   {"params_teacher", params_teacher},
                   {"params_shortcut", params_shortcut}};
  j["per_alpha"] = nlohmann::json::array();
  for (int a : alphas)
    j["per_alpha"].push_back({{"alpha", a},
                              {"mean_frame_macs", mean_frame_macs(a)},
                              {"savings_ratio", savings_ratio(a)},
                              {"cost_fraction", cost_fraction(a)}});
  return j;
}

CostReport cost_report(const TeacherGenerator& teacher, const ShortcutBlock& shortcut,
                       const TeacherSplit& split, const Shape& frame_shape) {
  const PathCosts pc = PathCosts::measure(teacher, shortcut, split, frame_shape);
  CostReport r;
  r.macs_full_frame = pc.full_frame;
  r.macs_shortcut_frame = pc.shortcut_frame;
  r.macs_shortcut_block = pc.shortcut_block;
  r.macs_reference_prep = pc.reference_prep;
  if (split.decoder_layer - split.encoder_layer > 1)
    r.macs_replaced_segment =
        cost::count_macs(teacher.describe(split.encoder_layer + 1, split.decoder_layer - 1), frame_shape).inclusive;
  const int feature_div = TeacherGenerator::layer_out_div(split.encoder_layer);
  r.macs_shortcut_block_exclusive = cost::count_macs(shortcut.describe(feature_div), frame_shape).exclusive;
  r.params_teacher = nn::count_params(teacher.parameters());
  r.params_shortcut = nn::count_params(shortcut.parameters());
  return r;
}

OverlayGeometry overlay_geometry(int frame_h, int frame_w, const Tensor& global_offsets,
                                 const Tensor& local_offsets, int feature_h, int feature_w,
                                 int kernel, int stride, OverlayVariant variant) {
  SV2V_CHECK(frame_h > 0 && frame_w > 0 && feature_h > 0 && feature_w > 0, "overlay: sizes must be positive");
  SV2V_CHECK(kernel >= 1 && kernel % 2 == 1, "overlay: kernel must be odd");
  SV2V_CHECK(stride >= 1, "overlay: stride must be >= 1");
  SV2V_CHECK(global_offsets.ndim() == 4 && global_offsets.dim(0) == 1 && global_offsets.dim(1) == 2,
             "overlay: global offsets must be [1, 2, Hg, Wg]");
  const int np = kernel * kernel;
  const bool with_local = variant == OverlayVariant::global_local;
  if (with_local)
    SV2V_CHECK(local_offsets.shape() == Shape({1, 2 * np, feature_h, feature_w}),
               "overlay: local offsets must be [1, 2*k^2, H, W]");
  const int hg = global_offsets.dim(2), wg = global_offsets.dim(3);

  OverlayGeometry g;
  g.kernel = kernel;
  g.scale = static_cast<double>(frame_h) / feature_h;
  g.global_scale = static_cast<double>(frame_h) / hg;
  const int c = kernel / 2;
  const std::size_t hw = static_cast<std::size_t>(feature_h) * feature_w;
  for (int i = 0; i < feature_h; i += stride)
    for (int j = 0; j < feature_w; j += stride) {
      g.outputs.push_back({i * g.scale, j * g.scale});
      const int gi = std::min(i * hg / feature_h, hg - 1);
      const int gj = std::min(j * wg / feature_w, wg - 1);
      const double gdy = global_offsets[static_cast<std::size_t>(gi) * wg + gj] * g.global_scale;
      const double gdx = global_offsets[static_cast<std::size_t>(hg + gi) * wg + gj] * g.global_scale;
      for (int k = 0; k < np; ++k) {
        double y = (i + k / kernel - c) * g.scale + gdy;
        double x = (j + k % kernel - c) * g.scale + gdx;
        if (with_local) {
          const std::size_t p = static_cast<std::size_t>(i) * feature_w + j;
          y += local_offsets[(2 * k) * hw + p] * g.scale;
          x += local_offsets[(2 * k + 1) * hw + p] * g.scale;
        }
        g.sampled.push_back({y, x});
      }
    }
  return g;
}

image::Image render_overlay(const Tensor& frame, const OverlayGeometry& geom, int magnify) {
  image::Image img = image::magnify(image::from_tensor(frame), magnify);
  if (img.channels == 1) {
    image::Image rgb(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int ch = 0; ch < 3; ++ch) rgb.at(x, y, ch) = img.at(x, y, 0);
    img = std::move(rgb);
  }
  auto dot = [&](const Point& p, std::uint8_t r, std::uint8_t gr) {
    const int cy = static_cast<int>(std::lround(p.y * magnify));
    const int cx = static_cast<int>(std::lround(p.x * magnify));
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int y = cy + dy, x = cx + dx;
        if (y < 0 || x < 0 || y >= img.height || x >= img.width) continue;
        img.at(x, y, 0) = r;
        img.at(x, y, 1) = gr;
        img.at(x, y, 2) = 0;
      }
  };
  for (const auto& p : geom.sampled) dot(p, 255, 0);
  for (const auto& p : geom.outputs) dot(p, 0, 255);
  return img;
}

void export_offset_overlay(const std::string& path, const Tensor& frame,
                           const Tensor& global_offsets, const Tensor& local_offsets, int kernel,
                           int stride, OverlayVariant variant, int magnify) {
  check_feature_map(frame, "overlay frame");
  const bool has_local = local_offsets.ndim() == 4;
  const int feature_h = has_local ? local_offsets.dim(2) : 2 * global_offsets.dim(2);
  const int feature_w = has_local ? local_offsets.dim(3) : 2 * global_offsets.dim(3);
  const OverlayGeometry g = overlay_geometry(frame.dim(2), frame.dim(3), global_offsets, local_offsets,
                                             feature_h, feature_w, kernel, stride, variant);
  image::write_png(path, render_overlay(frame, g, magnify));
}

image::Image mask_heatmap(const Tensor& mask) {
  SV2V_CHECK(mask.ndim() == 4 && mask.dim(0) == 1, "mask heatmap expects [1, N_p, H, W]");
  const int np = mask.dim(1), h = mask.dim(2), w = mask.dim(3);
  image::Image img(w, h, 1);
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (std::size_t p = 0; p < hw; ++p) {
    double s = 0.0;
    for (int k = 0; k < np; ++k) s += mask[k * hw + p];
    const double m = std::clamp(s / np, 0.0, 1.0);
    img.pixels[p] = static_cast<std::uint8_t>(std::lround(m * 255.0));
  }
  return img;
}

void export_mask_heatmap(const std::string& path, const Tensor& mask) {
  image::write_png(path, mask_heatmap(mask));
}

}  // namespace sv2v::analysis
