// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sv2v/tensor.hpp"

namespace sv2v {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_int(std::string_view s, long long& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return out = false, true;
  return false;
}

void check_value(const ConfigKey& k, std::string_view v) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("invalid value '" + std::string(v) + "' for '" + k.name + "': " + why);
  };
  double num = 0.0;
  switch (k.type) {
    case ValueType::integer: {
      long long i = 0;
      if (!parse_int(v, i)) fail("expected an integer");
      num = static_cast<double>(i);
      break;
    }
    case ValueType::real:
      if (!parse_real(v, num)) fail("expected a number");
      break;
    case ValueType::boolean: {
      bool b = false;
      if (!parse_bool(v, b)) fail("expected true|false");
      return;
    }
    case ValueType::text:
      if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) {
        std::string opts;
        for (const auto& c : k.choices) opts += (opts.empty() ? "" : "|") + c;
        fail("expected one of " + opts);
      }
      return;
  }
  if (num < k.min || num > k.max) {
    std::ostringstream os;
    os << "must be in [" << k.min << ", " << k.max << "]";
    fail(os.str());
  }
}

}  // namespace

Config::Config(std::vector<ConfigKey> schema) : schema_(std::move(schema)) {
  for (const auto& k : schema_) {
    SV2V_CHECK(!values_.count(k.name), "duplicate config key '" + k.name + "'");
    check_value(k, k.default_value);
    values_[k.name] = k.default_value;
  }
}

const ConfigKey& Config::key_info(std::string_view key) const {
  for (const auto& k : schema_)
    if (k.name == key) return k;
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

bool Config::has_key(std::string_view key) const { return values_.find(key) != values_.end(); }

void Config::set(std::string_view key, std::string_view value) {
  const ConfigKey& k = key_info(key);
  const std::string_view v = trim(value);
  check_value(k, v);
  values_[k.name] = std::string(v);
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw std::invalid_argument("override '" + std::string(assignment) + "' is not key=value");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void Config::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    try {
      apply_override(s);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

long long Config::get_int(std::string_view key) const {
  const ConfigKey& k = key_info(key);
  SV2V_CHECK(k.type == ValueType::integer, "config key '" + k.name + "' is not an integer");
  long long v = 0;
  parse_int(values_.find(key)->second, v);
  return v;
}

double Config::get_double(std::string_view key) const {
  const ConfigKey& k = key_info(key);
  SV2V_CHECK(k.type == ValueType::real || k.type == ValueType::integer,
             "config key '" + k.name + "' is not numeric");
  double v = 0;
  parse_real(values_.find(key)->second, v);
  return v;
}

bool Config::get_bool(std::string_view key) const {
  const ConfigKey& k = key_info(key);
  SV2V_CHECK(k.type == ValueType::boolean, "config key '" + k.name + "' is not a boolean");
  bool v = false;
  parse_bool(values_.find(key)->second, v);
  return v;
}

const std::string& Config::get_string(std::string_view key) const {
  key_info(key);
  return values_.find(key)->second;
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& k : schema_) out += k.name + " = " + values_.find(k.name)->second + "\n";
  return out;
}

}  // namespace sv2v
