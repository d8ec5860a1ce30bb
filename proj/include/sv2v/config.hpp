// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sv2v {

enum class ValueType { integer, real, boolean, text };

struct ConfigKey {
  std::string name;
  ValueType type = ValueType::text;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // text keys only; empty = any
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
};

/// Typed key=value settings checked against a fixed schema. Files use one
/// `key = value` per line; `#` starts a comment.
class Config {
 public:
  explicit Config(std::vector<ConfigKey> schema);

  /// Throws std::invalid_argument naming the file and line on unknown keys or
  /// invalid values, IoError when the file cannot be read.
  void load_file(const std::string& path);
  void set(std::string_view key, std::string_view value);
  /// "key=value"
  void apply_override(std::string_view assignment);

  long long get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  const std::string& get_string(std::string_view key) const;

  bool has_key(std::string_view key) const;
  const std::vector<ConfigKey>& schema() const { return schema_; }
  /// All keys in schema order, one `key = value` per line.
  std::string serialize() const;

 private:
  const ConfigKey& key_info(std::string_view key) const;

  std::vector<ConfigKey> schema_;
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace sv2v
