// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "sv2v/analysis.hpp"
#include "sv2v/cost.hpp"

using namespace sv2v;
using namespace sv2v::analysis;

namespace {

cost::LayerSpec conv(int ci, int co, int k, int stride = 1, int pad = 0) {
  return {"conv", cost::LayerKind::conv, ci, co, k, stride, pad};
}

}  // namespace

TEST_CASE("correlation examples") {
  CHECK(*pearson(Tensor({3}, {1, 2, 3}), Tensor({3}, {2, 4, 6})) == doctest::Approx(1.0));
  CHECK(*pearson(Tensor({3}, {1, 2, 3}), Tensor({3}, {3, 2, 1})) == doctest::Approx(-1.0));
  CHECK_FALSE(pearson(Tensor({3}, {1, 1, 1}), Tensor({3}, {1, 2, 3})).has_value());
  // cc([1,2,3,4], [1,3,2,4]) = 0.8 by hand.
  CHECK(*pearson(Tensor({4}, {1, 2, 3, 4}), Tensor({4}, {1, 3, 2, 4})) == doctest::Approx(0.8));

  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = Tensor::randn({1, 2, 4, 4}, rng, 1.0), y = Tensor::randn({1, 2, 4, 4}, rng, 1.0);
    const double c = *pearson(x, y);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(*pearson(y, x) == doctest::Approx(c).epsilon(1e-12));
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double a = u(rng), b = u(rng);
    Tensor ax = x;
    for (auto& v : ax.values()) v = a * v + b;
    CHECK(*pearson(ax, y) == doctest::Approx((a > 0 ? 1 : -1) * c).epsilon(1e-9));
  }
}

TEST_CASE("redundancy statistics") {
  std::mt19937_64 rng(72);
  const Tensor x = Tensor::randn({1, 3, 5, 5}, rng, 2.0), y = Tensor::randn({1, 3, 5, 5}, rng, 1.0);
  const auto same = redundancy_stats({{x, x}, {y, y}});
  CHECK(same.cc == doctest::Approx(1.0));
  CHECK(same.norm_rmse == doctest::Approx(0.0));
  CHECK(same.pair_count == 2);
  const auto neg = redundancy_stats({{x, x * -1.0}, {y, y * -3.0}});
  CHECK(neg.cc == doctest::Approx(-1.0));
  // z-scored x and -x differ by 2 z everywhere, so RMSE is 2.
  CHECK(neg.norm_rmse == doctest::Approx(2.0));
  const auto skip = redundancy_stats({{x, x}, {y, y}, {Tensor(x.shape(), 4.0), x}});
  CHECK(skip.pair_count == 2);
  CHECK(skip.skipped == 1);
  CHECK_THROWS_AS(redundancy_stats({{x, y}}), std::invalid_argument);
  CHECK_THROWS_AS(redundancy_stats({{x, y}, {x, Tensor({1, 3, 5, 4})}}), std::invalid_argument);
}

TEST_CASE("redundancy report on static and moving inputs") {
  std::mt19937_64 rng(73);
  const TeacherGenerator teacher(4, 1);
  std::vector<std::vector<Tensor>> still;
  for (int v = 0; v < 2; ++v) {
    const Tensor f = Tensor::uniform({1, 3, 16, 16}, rng, -1.0, 1.0);
    still.push_back({f, f, f});
  }
  const auto report = teacher_redundancy(still, teacher, 6, 1);
  REQUIRE(report.layers.size() == 12);
  for (const auto& l : report.layers) {
    CHECK(l.adjacent.cc == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(l.adjacent.pair_count == 4);
    CHECK(l.random.cc < 1.0);
  }
  CHECK(report.mean_margin() > 0.0);
  const auto j = report.to_json();
  CHECK(j["layers"].size() == 12);
  CHECK(j["layers"][0].contains("adjacent"));
}

TEST_CASE("MAC counter") {
  cost::NetworkDescription one;
  one.layers = {conv(1, 1, 3, 1, 1)};
  CHECK(cost::count_macs(one, {1, 1, 8, 8}).inclusive == 576);
  cost::NetworkDescription wide;
  wide.layers = {conv(256, 128, 1)};
  CHECK(cost::count_macs(wide, {1, 256, 32, 64}).inclusive == 67108864ull);

  cost::NetworkDescription strided;
  strided.layers = {conv(3, 8, 3, 2, 1)};
  CHECK(cost::count_macs(strided, {1, 3, 16, 16}).inclusive == 8ull * 3 * 9 * 8 * 8);

  cost::NetworkDescription d;
  d.layers = {{"d", cost::LayerKind::deform_conv, 4, 4, 3, 1, 1}};
  const auto dc = cost::count_macs(d, {1, 4, 8, 8});
  CHECK(dc.inclusive == 4ull * 4 * 9 * 64 + 4ull * 4 * 9 * 64);
  CHECK(dc.exclusive == 4ull * 4 * 9 * 64);

  cost::NetworkDescription r;
  r.layers = {{"r", cost::LayerKind::resize, 5, 5, 1, 1, 0, 0, 1, 2}};
  CHECK(cost::count_macs(r, {1, 5, 8, 8}).inclusive == 4ull * 5 * 16);

  // A composed network counts exactly the sum of its layers.
  cost::NetworkDescription composed = one;
  composed.layers.push_back(conv(1, 2, 1));
  const auto total = cost::count_macs(composed, {1, 1, 8, 8});
  std::uint64_t sum = 0;
  for (const auto& l : total.layers) sum += l.total();
  CHECK(total.inclusive == sum);
  CHECK(total.inclusive == 576 + 128);

  CHECK_THROWS_AS(cost::layer_kind_from_string("pooling"), std::invalid_argument);
  const auto round = cost::description_from_json(cost::to_json(composed));
  CHECK(cost::count_macs(round, {1, 1, 8, 8}).inclusive == total.inclusive);
}

TEST_CASE("cost report") {
  const TeacherGenerator teacher(32, 1);
  const auto split = TeacherSplit::for_level(Dependence::medium);
  const ShortcutBlock sc(ShortcutConfig::for_channels(teacher.layer_out_channels(split.encoder_layer)), 1);
  const auto r = cost_report(teacher, sc, split, {1, 3, 64, 128});
  CHECK(r.macs_shortcut_block < r.macs_replaced_segment);
  CHECK(r.macs_shortcut_frame < r.macs_full_frame);
  CHECK(r.macs_full_frame - r.macs_replaced_segment + r.macs_shortcut_block == r.macs_shortcut_frame);
  CHECK(r.savings_ratio(1) == 1.0);
  double prev = 1.0;
  for (int a : {2, 3, 6, 12}) {
    CHECK(r.savings_ratio(a) > prev);
    prev = r.savings_ratio(a);
    CHECK(r.cost_fraction(a) == doctest::Approx(1.0 / r.savings_ratio(a)));
    CHECK(r.cost_fraction(a) > static_cast<double>(r.macs_shortcut_frame) / r.macs_full_frame);
  }
  CHECK(r.mean_frame_macs(3) ==
        doctest::Approx((r.macs_full_frame + r.macs_reference_prep + 2.0 * r.macs_shortcut_frame) / 3.0));
  CHECK(r.mean_frame_macs(1) == r.macs_full_frame);
  CHECK(r.macs_reference_prep > 0);
  std::uint64_t params = 0;
  for (const auto& p : sc.parameters()) params += p.var.value().size();
  CHECK(r.params_shortcut == params);
  const auto j = r.to_json({1, 3});
  REQUIRE(j["per_alpha"].size() == 2);
  CHECK(j["per_alpha"][1]["savings_ratio"].get<double>() == doctest::Approx(r.savings_ratio(3)));
}

TEST_CASE("overlay geometry") {
  const int k = 3;
  SUBCASE("zero offsets sample the regular kernel grid") {
    const Tensor g({1, 2, 4, 8}), l({1, 18, 8, 16});
    for (auto variant : {OverlayVariant::global, OverlayVariant::global_local}) {
      const auto geom = overlay_geometry(32, 64, g, l, 8, 16, k, 4, variant);
      CHECK(geom.scale == 4.0);
      CHECK(geom.global_scale == 8.0);
      REQUIRE(geom.outputs.size() == 2 * 4);
      REQUIRE(geom.sampled.size() == geom.outputs.size() * 9);
      for (std::size_t o = 0; o < geom.outputs.size(); ++o)
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx) {
            const Point p = geom.sampled[o * 9 + ky * 3 + kx];
            CHECK(p.y == geom.outputs[o].y + (ky - 1) * 4.0);
            CHECK(p.x == geom.outputs[o].x + (kx - 1) * 4.0);
          }
    }
  }
  SUBCASE("constant offsets shift by offset times scale") {
    Tensor g({1, 2, 4, 8}), l({1, 18, 8, 16});
    for (int p = 0; p < 32; ++p) g[p] = 0.5;  // rows on the coarse grid
    for (int kk = 0; kk < 9; ++kk)
      for (int p = 0; p < 128; ++p) l[(2 * kk + 1) * 128 + p] = 1.25;  // columns, feature grid
    const auto zero = overlay_geometry(32, 64, Tensor({1, 2, 4, 8}), l, 8, 16, k, 2, OverlayVariant::global);
    const auto glob = overlay_geometry(32, 64, g, l, 8, 16, k, 2, OverlayVariant::global);
    const auto both = overlay_geometry(32, 64, g, l, 8, 16, k, 2, OverlayVariant::global_local);
    for (std::size_t i = 0; i < zero.sampled.size(); ++i) {
      CHECK(glob.sampled[i].y == doctest::Approx(zero.sampled[i].y + 0.5 * 8.0));
      CHECK(glob.sampled[i].x == doctest::Approx(zero.sampled[i].x));
      CHECK(both.sampled[i].y == doctest::Approx(zero.sampled[i].y + 4.0));
      CHECK(both.sampled[i].x == doctest::Approx(zero.sampled[i].x + 1.25 * 4.0));
    }
  }
  SUBCASE("rendering") {
    const Tensor frame({1, 3, 16, 16}, 0.0);
    const auto geom = overlay_geometry(16, 16, Tensor({1, 2, 2, 2}), Tensor({1, 18, 4, 4}), 4, 4, k, 2,
                                       OverlayVariant::global_local);
    const auto img = render_overlay(frame, geom, 2);
    CHECK(img.width == 32);
    CHECK(img.height == 32);
    CHECK(img.channels == 3);
    // The first output point sits at the origin and is drawn green.
    CHECK(img.at(0, 0, 1) == 255);
    CHECK(img.at(0, 0, 0) == 0);
    const auto path = std::filesystem::temp_directory_path() / "sv2v_overlay.png";
    export_offset_overlay(path.string(), frame, Tensor({1, 2, 2, 2}), Tensor({1, 18, 4, 4}), k, 2,
                          OverlayVariant::global_local, 2);
    CHECK(std::filesystem::file_size(path) > 0);
    std::filesystem::remove(path);
  }
}

TEST_CASE("mask heatmaps") {
  auto uniform = [](double v) {
    const auto img = mask_heatmap(Tensor({1, 9, 6, 7}, v));
    std::set<int> levels(img.pixels.begin(), img.pixels.end());
    return std::pair{levels.size(), static_cast<int>(*levels.begin())};
  };
  CHECK(uniform(0.5) == std::pair<std::size_t, int>{1, 128});
  CHECK(uniform(1.0) == std::pair<std::size_t, int>{1, 255});
  CHECK(uniform(0.0) == std::pair<std::size_t, int>{1, 0});

  Tensor block({1, 9, 6, 7}, 0.0);
  for (int kk = 0; kk < 9; ++kk)
    for (int i = 2; i < 4; ++i)
      for (int j = 3; j < 6; ++j) block.at(0, kk, i, j) = 1.0;
  const auto img = mask_heatmap(block);
  CHECK(img.width == 7);
  CHECK(img.height == 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 7; ++j) CHECK(img.at(j, i, 0) == ((i >= 2 && i < 4 && j >= 3 && j < 6) ? 255 : 0));
}
