// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace sv2v {

namespace {

constexpr char kMagic[8] = {'S', 'V', '2', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  std::uint32_t u32() {
    std::uint32_t v = 0;
    read(&v, 4);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 20)) fail("implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void read(void* dst, std::size_t n) {
    is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!is_) fail("truncated file");
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw IoError("checkpoint '" + path_ + "': " + why);
  }

 private:
  std::istream& is_;
  std::string path_;
};

}  // namespace

const Tensor& Checkpoint::array(const std::string& name) const {
  for (const auto& [n, t] : arrays)
    if (n == name) return t;
  throw IoError("checkpoint has no array named '" + name + "'");
}

const std::string& Checkpoint::value(const std::string& key) const {
  auto it = config.find(key);
  if (it == config.end()) throw IoError("checkpoint manifest lacks key '" + key + "'");
  return it->second;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(ckpt.config.size()));
  for (const auto& [k, v] : ckpt.config) {
    put_str(os, k);
    put_str(os, v);
  }
  put_u32(os, static_cast<std::uint32_t>(ckpt.arrays.size()));
  std::vector<float> buf;
  for (const auto& [name, t] : ckpt.arrays) {
    put_str(os, name);
    put_u32(os, static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
    buf.assign(t.values().begin(), t.values().end());
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!os) throw IoError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  Reader r(is, path);
  char magic[8];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) r.fail("bad magic");
  if (r.u32() != kVersion) r.fail("unsupported version");
  Checkpoint ckpt;
  const std::uint32_t n_config = r.u32();
  for (std::uint32_t i = 0; i < n_config; ++i) {
    std::string k = r.str();
    ckpt.config[k] = r.str();
  }
  const std::uint32_t n_arrays = r.u32();
  std::vector<float> buf;
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = r.str();
    const std::uint32_t ndim = r.u32();
    if (ndim > 8) r.fail("implausible rank for '" + name + "'");
    Shape shape(ndim);
    for (auto& d : shape) d = static_cast<int>(r.u32());
    buf.resize(shape_numel(shape));
    r.read(buf.data(), buf.size() * sizeof(float));
    ckpt.arrays.emplace_back(std::move(name),
                             Tensor(shape, std::vector<double>(buf.begin(), buf.end())));
  }
  return ckpt;
}

std::vector<std::pair<std::string, Tensor>> snapshot(const std::vector<NamedParam>& params) {
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.name, p.var.value());
  return out;
}

void restore(const std::vector<NamedParam>& params, const Checkpoint& ckpt) {
  for (const auto& p : params) {
    const Tensor& src = ckpt.array(p.name);
    Var v = p.var;
    if (!src.same_shape(v.value()))
      throw IoError("checkpoint array '" + p.name + "' has shape " + shape_str(src.shape()) +
                    ", expected " + shape_str(v.shape()));
    v.mutable_value() = src;
  }
}

}  // namespace sv2v
