// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/dataio.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "sv2v/image.hpp"
#include "sv2v/parallel.hpp"

namespace sv2v::data {

static_assert(std::endian::native == std::endian::little, "raw containers assume a little-endian host");

namespace fs = std::filesystem;

Task task_from_string(std::string_view s) {
  if (s == "color_invert") return Task::color_invert;
  if (s == "edge_to_fill") return Task::edge_to_fill;
  throw std::invalid_argument("unknown task '" + std::string(s) + "' (expected color_invert|edge_to_fill)");
}

std::string to_string(Task t) { return t == Task::color_invert ? "color_invert" : "edge_to_fill"; }

void SyntheticVideoSpec::validate() const {
  SV2V_CHECK(height > 0 && width > 0, "zero-area canvas");
  SV2V_CHECK(num_frames >= 1, "num_frames must be >= 1");
  SV2V_CHECK(motion_px_per_frame >= 0 && std::isfinite(motion_px_per_frame), "motion must be finite and >= 0");
  SV2V_CHECK(num_shapes >= 0, "num_shapes must be >= 0");
}

nlohmann::json SyntheticVideoSpec::to_json() const {
  return {{"num_frames", num_frames}, {"height", height}, {"width", width},
          {"motion_px_per_frame", motion_px_per_frame}, {"num_shapes", num_shapes},
          {"seed", seed}, {"task", to_string(task)}};
}

SyntheticVideoSpec SyntheticVideoSpec::from_json(const nlohmann::json& j) {
  SyntheticVideoSpec s;
  s.num_frames = j.at("num_frames").get<int>();
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.motion_px_per_frame = j.at("motion_px_per_frame").get<double>();
  s.num_shapes = j.at("num_shapes").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.task = task_from_string(j.at("task").get<std::string>());
  s.validate();
  return s;
}

namespace {

struct Wave {
  double fy, fx, phase, amp;
};

struct Shape2D {
  bool circle;
  double cy, cx;     // centre at t = 0
  double vy, vx;     // pixels per frame
  double ry, rx;     // radius / half extents
  double color[3];
};

// Coverage from a signed distance, one-pixel ramp.
double coverage(double d) { return std::clamp(0.5 - d, 0.0, 1.0); }

double signed_distance(const Shape2D& s, double y, double x, int t) {
  const double py = y - (s.cy + s.vy * t);
  const double px = x - (s.cx + s.vx * t);
  if (s.circle) return std::hypot(py, px) - s.ry;
  return std::max(std::abs(py) - s.ry, std::abs(px) - s.rx);
}

}  // namespace

VideoPair generate_video(const SyntheticVideoSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<Wave> waves[3];
  for (auto& ch : waves)
    for (int i = 0; i < 4; ++i)
      ch.push_back({(0.02 + 0.12 * u01(rng)) * (u01(rng) < 0.5 ? -1 : 1), 0.02 + 0.12 * u01(rng),
                    two_pi * u01(rng), 0.08 + 0.1 * u01(rng)});
  double base[3];
  for (double& b : base) b = -0.3 + 0.6 * u01(rng);

  const double speed = spec.motion_px_per_frame;
  std::vector<Shape2D> shapes;
  for (int i = 0; i < spec.num_shapes; ++i) {
    Shape2D s;
    s.circle = u01(rng) < 0.5;
    const double r = std::max(2.0, std::min(spec.height, spec.width) * (0.08 + 0.1 * u01(rng)));
    s.ry = r;
    s.rx = s.circle ? r : r * (0.6 + 0.8 * u01(rng));
    s.cy = spec.height * (0.15 + 0.7 * u01(rng));
    s.cx = spec.width * (0.15 + 0.7 * u01(rng));
    const double dir = two_pi * u01(rng);
    s.vy = speed * std::sin(dir);
    s.vx = speed * std::cos(dir);
    for (double& c : s.color) c = u01(rng) < 0.5 ? -0.9 + 0.4 * u01(rng) : 0.5 + 0.4 * u01(rng);
    shapes.push_back(s);
  }

  VideoPair out;
  const int h = spec.height, w = spec.width;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int t = 0; t < spec.num_frames; ++t) {
    Tensor src({1, 3, h, w});
    Tensor tgt({1, 3, h, w});
    const double pan = speed * t;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double bg[3];
        for (int c = 0; c < 3; ++c) {
          double v = base[c];
          for (const auto& wv : waves[c]) v += wv.amp * std::sin(wv.fy * y + wv.fx * (x + pan) + wv.phase);
          bg[c] = v;
        }
        double fill[3] = {bg[0], bg[1], bg[2]};
        double edge[3];
        for (int c = 0; c < 3; ++c) edge[c] = 0.4 * bg[c];
        for (const auto& s : shapes) {
          const double d = signed_distance(s, y + 0.5, x + 0.5, t);
          const double a_fill = coverage(d);
          const double a_edge = coverage(std::abs(d) - 0.75);
          for (int c = 0; c < 3; ++c) {
            fill[c] = (1 - a_fill) * fill[c] + a_fill * s.color[c];
            edge[c] = (1 - a_edge) * edge[c] + a_edge * s.color[c];
          }
        }
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        for (int c = 0; c < 3; ++c) {
          const double f = std::clamp(fill[c], -1.0, 1.0);
          if (spec.task == Task::color_invert) {
            src[c * hw + p] = f;
            tgt[c * hw + p] = -f;
          } else {
            src[c * hw + p] = std::clamp(edge[c], -1.0, 1.0);
            tgt[c * hw + p] = f;
          }
        }
      }
    out.source.frames.push_back(std::move(src));
    out.target.frames.push_back(std::move(tgt));
  }
  out.source.manifest = {{"spec", spec.to_json()}, {"role", "source"}};
  out.target.manifest = {{"spec", spec.to_json()}, {"role", "target"}};
  return out;
}

std::vector<VideoPair> generate_dataset(const SyntheticVideoSpec& spec, int count) {
  SV2V_CHECK(count >= 1, "dataset needs at least one video");
  std::vector<VideoPair> videos(count);
  parallel_for(count, [&](int i) {
    SyntheticVideoSpec s = spec;
    s.seed = spec.seed + static_cast<std::uint64_t>(i);
    videos[i] = generate_video(s);
  });
  return videos;
}

FrameFormat frame_format_from_string(std::string_view s) {
  if (s == "png") return FrameFormat::png;
  if (s == "raw") return FrameFormat::raw;
  throw std::invalid_argument("unknown frame format '" + std::string(s) + "' (expected png|raw)");
}

std::string to_string(FrameFormat f) { return f == FrameFormat::png ? "png" : "raw"; }

namespace {

std::string frame_name(int t, FrameFormat f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.%s", t, f == FrameFormat::png ? "png" : "raw");
  return buf;
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::uint32_t crc_update(std::uint32_t crc, const std::vector<char>& bytes) {
  return static_cast<std::uint32_t>(
      crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

void save_video(const VideoRecord& record, const std::string& dir, FrameFormat format) {
  SV2V_CHECK(!record.frames.empty(), "save_video: no frames");
  const Shape shape = record.frames.front().shape();
  for (const auto& f : record.frames) SV2V_CHECK(f.shape() == shape, "save_video: frames differ in shape");
  fs::create_directories(dir);
  std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  for (std::size_t t = 0; t < record.frames.size(); ++t) {
    const fs::path p = fs::path(dir) / frame_name(static_cast<int>(t), format);
    if (format == FrameFormat::png)
      image::write_png(p.string(), image::from_tensor(record.frames[t]));
    else
      write_raw(p.string(), record.frames[t]);
    crc = crc_update(crc, read_bytes(p));
  }
  nlohmann::json m = record.manifest.is_object() ? record.manifest : nlohmann::json::object();
  m["num_frames"] = record.frames.size();
  m["shape"] = shape;
  m["format"] = to_string(format);
  m["checksum"] = crc;
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw IoError("cannot write manifest in '" + dir + "'");
  os << m.dump(2) << '\n';
  if (!os) throw IoError("cannot write manifest in '" + dir + "'");
}

VideoRecord load_video(const std::string& dir) {
  const fs::path mp = fs::path(dir) / "manifest.json";
  if (!fs::exists(mp)) throw IoError("missing manifest: '" + mp.string() + "'");
  VideoRecord rec;
  int n = 0;
  FrameFormat format = FrameFormat::png;
  Shape shape;
  std::uint32_t expected = 0;
  try {
    std::ifstream is(mp);
    rec.manifest = nlohmann::json::parse(is);
    n = rec.manifest.at("num_frames").get<int>();
    format = frame_format_from_string(rec.manifest.at("format").get<std::string>());
    shape = rec.manifest.at("shape").get<Shape>();
    expected = rec.manifest.at("checksum").get<std::uint32_t>();
  } catch (const std::exception& e) {
    throw IoError("corrupt manifest '" + mp.string() + "': " + e.what());
  }
  if (n < 1) throw IoError("corrupt manifest '" + mp.string() + "': num_frames < 1");
  std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  for (int t = 0; t < n; ++t) {
    const fs::path p = fs::path(dir) / frame_name(t, format);
    if (!fs::exists(p)) throw IoError("missing frame file '" + p.string() + "'");
    crc = crc_update(crc, read_bytes(p));
    Tensor f = format == FrameFormat::png ? image::to_tensor(image::read_png(p.string())) : read_raw(p.string());
    if (f.shape() != shape)
      throw IoError("frame '" + p.string() + "' has shape " + shape_str(f.shape()) + ", manifest says " +
                    shape_str(shape));
    rec.frames.push_back(std::move(f));
  }
  if (crc != expected)
    throw IoError("checksum mismatch in '" + dir + "': manifest " + std::to_string(expected) + ", content " +
                  std::to_string(crc));
  return rec;
}

namespace {
constexpr char kRawMagic[8] = {'S', 'V', '2', 'V', 'R', 'A', 'W', '1'};

void put_u32(std::ofstream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
std::uint32_t get_u32(std::ifstream& is, const std::string& path) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) throw IoError("truncated raw container '" + path + "'");
  return v;
}
}  // namespace

void write_raw(const std::string& path, const Tensor& t, RawDtype dtype) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  os.write(kRawMagic, sizeof kRawMagic);
  put_u32(os, static_cast<std::uint32_t>(dtype));
  put_u32(os, static_cast<std::uint32_t>(t.ndim()));
  for (int d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
  if (dtype == RawDtype::f32) {
    std::vector<float> buf(t.values().begin(), t.values().end());
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  } else {
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw IoError("failed writing '" + path + "'");
}

Tensor read_raw(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kRawMagic, 8) != 0)
    throw IoError("'" + path + "' is not a raw tensor container");
  const std::uint32_t tag = get_u32(is, path);
  if (tag != 1 && tag != 2) throw IoError("unknown dtype tag " + std::to_string(tag) + " in '" + path + "'");
  const std::uint32_t ndim = get_u32(is, path);
  if (ndim > 8) throw IoError("implausible rank in '" + path + "'");
  Shape shape;
  for (std::uint32_t i = 0; i < ndim; ++i) shape.push_back(static_cast<int>(get_u32(is, path)));
  Tensor t(shape);
  if (tag == 1) {
    std::vector<float> buf(t.size());
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float))))
      throw IoError("truncated payload in '" + path + "'");
    std::copy(buf.begin(), buf.end(), t.data());
  } else if (!is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)))) {
    throw IoError("truncated payload in '" + path + "'");
  }
  return t;
}

}  // namespace sv2v::data
