// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "sv2v/dataio.hpp"
#include "sv2v/image.hpp"

using namespace sv2v;
using namespace sv2v::data;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SyntheticVideoSpec small_spec() {
  SyntheticVideoSpec s;
  s.num_frames = 4;
  s.height = 24;
  s.width = 40;
  s.seed = 5;
  return s;
}

/// Correlation of next(y, x) with prev(y + dy, x + dx) over the overlap.
double shifted_cc(const Tensor& prev, const Tensor& next, int dy, int dx) {
  const int H = prev.dim(2), W = prev.dim(3);
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  long n = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = 6; y < H - 6; ++y)
      for (int x = 6; x < W - 6; ++x) {
        const double a = next.at(0, c, y, x), b = prev.at(0, c, y + dy, x + dx);
        sa += a, sb += b, saa += a * a, sbb += b * b, sab += a * b, ++n;
      }
  const double cov = sab / n - sa / n * sb / n;
  return cov / std::sqrt((saa / n - sa / n * sa / n) * (sbb / n - sb / n * sb / n));
}

}  // namespace

TEST_CASE("generation is deterministic and bounded") {
  const auto a = generate_video(small_spec());
  const auto b = generate_video(small_spec());
  REQUIRE(a.source.frames.size() == 4);
  for (int t = 0; t < 4; ++t) {
    CHECK(a.source.frames[t].storage() == b.source.frames[t].storage());
    CHECK(a.target.frames[t].storage() == b.target.frames[t].storage());
    CHECK(a.source.frames[t].shape() == Shape({1, 3, 24, 40}));
    CHECK(max_abs(a.source.frames[t]) <= 1.0);
    CHECK(max_abs(a.target.frames[t]) <= 1.0);
    // color_invert targets negate the source.
    CHECK(max_abs(a.source.frames[t] + a.target.frames[t]) == 0.0);
  }
  auto other = small_spec();
  other.seed = 6;
  CHECK(generate_video(other).source.frames[0].storage() != a.source.frames[0].storage());

  const auto ds = generate_dataset(small_spec(), 3);
  REQUIRE(ds.size() == 3);
  auto third = small_spec();
  third.seed += 2;
  CHECK(ds[2].source.frames[1].storage() == generate_video(third).source.frames[1].storage());
}

TEST_CASE("motion control") {
  auto spec = small_spec();
  spec.motion_px_per_frame = 0.0;
  const auto still = generate_video(spec);
  for (int t = 1; t < 4; ++t) CHECK(still.source.frames[t].storage() == still.source.frames[0].storage());

  spec = small_spec();
  spec.height = 48;
  spec.width = 64;
  spec.num_shapes = 0;  // shapes drift in random directions; the pan is a pure shift
  spec.motion_px_per_frame = 2.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    spec.seed = seed;
    const auto v = generate_video(spec);
    int best_dy = 99, best_dx = 99;
    double best = -2;
    for (int dy = -4; dy <= 4; ++dy)
      for (int dx = -4; dx <= 4; ++dx) {
        const double c = shifted_cc(v.source.frames[1], v.source.frames[2], dy, dx);
        if (c > best) best = c, best_dy = dy, best_dx = dx;
      }
    CHECK(best_dy == 0);
    CHECK(best_dx == 2);
    CHECK(best == doctest::Approx(1.0));
  }
}

TEST_CASE("edge-to-fill task") {
  auto spec = small_spec();
  spec.task = Task::edge_to_fill;
  const auto v = generate_video(spec);
  CHECK(v.source.frames[0].storage() != v.target.frames[0].storage());
  CHECK(task_from_string("edge_to_fill") == Task::edge_to_fill);
  CHECK_THROWS_AS(task_from_string("paint"), std::invalid_argument);
}

TEST_CASE("generator settings validation and serialisation") {
  auto spec = small_spec();
  spec.width = 0;
  CHECK_THROWS_AS(generate_video(spec), std::invalid_argument);
  spec = small_spec();
  spec.motion_px_per_frame = -1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.task = Task::edge_to_fill;
  const auto back = SyntheticVideoSpec::from_json(spec.to_json());
  CHECK(back.to_json() == spec.to_json());
}

TEST_CASE("video round trips") {
  TempDir tmp("sv2v_dataio_test");
  const auto v = generate_video(small_spec());

  SUBCASE("png frames within the quantisation bound") {
    save_video(v.source, (tmp.path / "png").string());
    const auto r = load_video((tmp.path / "png").string());
    REQUIRE(r.frames.size() == 4);
    for (int t = 0; t < 4; ++t) CHECK(max_abs_diff(r.frames[t], v.source.frames[t]) <= 1.0 / 255.0 + 1e-12);
    CHECK(r.manifest["num_frames"] == 4);
  }
  SUBCASE("raw frames are exact in single precision") {
    save_video(v.source, (tmp.path / "raw").string(), FrameFormat::raw);
    const auto r = load_video((tmp.path / "raw").string());
    for (int t = 0; t < 4; ++t)
      for (std::size_t i = 0; i < r.frames[t].size(); ++i)
        REQUIRE(r.frames[t][i] == static_cast<double>(static_cast<float>(v.source.frames[t][i])));
  }
  SUBCASE("corruption is detected") {
    const auto dir = tmp.path / "bad";
    save_video(v.source, dir.string());
    {
      std::ofstream f(dir / "frame_0002.png", std::ios::binary | std::ios::app);
      f << "x";
    }
    CHECK_THROWS_AS(load_video(dir.string()), IoError);
    save_video(v.source, dir.string());
    fs::remove(dir / "frame_0003.png");
    CHECK_THROWS_AS(load_video(dir.string()), IoError);
    save_video(v.source, dir.string());
    {
      std::ofstream f(dir / "manifest.json");
      f << "{ not json";
    }
    CHECK_THROWS_AS(load_video(dir.string()), IoError);
    fs::remove(dir / "manifest.json");
    CHECK_THROWS_AS(load_video(dir.string()), IoError);
  }
}

TEST_CASE("raw tensor container") {
  TempDir tmp("sv2v_raw_test");
  std::mt19937_64 rng(81);
  const Tensor t = Tensor::randn({2, 3, 4, 5}, rng, 1.0);
  const auto p64 = (tmp.path / "a.raw").string();
  write_raw(p64, t, RawDtype::f64);
  CHECK(read_raw(p64).storage() == t.storage());
  CHECK(read_raw(p64).shape() == t.shape());

  Tensor f32 = t;
  for (auto& v : f32.values()) v = static_cast<float>(v);
  const auto p32 = (tmp.path / "b.raw").string();
  write_raw(p32, f32);
  CHECK(read_raw(p32).storage() == f32.storage());
  CHECK(fs::file_size(p32) == 8 + 4 + 4 + 4 * 4 + 120 * 4);

  {
    std::ofstream f(tmp.path / "c.raw", std::ios::binary);
    f << "NOTARAW!";
  }
  CHECK_THROWS_AS(read_raw((tmp.path / "c.raw").string()), IoError);
  CHECK_THROWS_AS(read_raw((tmp.path / "missing.raw").string()), IoError);
}

TEST_CASE("image helpers") {
  CHECK(image::quantize(-1.0) == 0);
  CHECK(image::quantize(1.0) == 255);
  CHECK(image::quantize(7.0) == 255);
  CHECK(image::dequantize(255) == doctest::Approx(1.0));
  const Tensor t({1, 3, 2, 2}, 0.0);
  const auto img = image::from_tensor(t);
  CHECK(img.width == 2);
  CHECK(image::magnify(img, 3).width == 6);
  CHECK(image::to_tensor(img).shape() == t.shape());
  CHECK_THROWS_AS(image::read_png("/nonexistent.png"), IoError);
}
