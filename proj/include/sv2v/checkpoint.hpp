// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sv2v/autograd.hpp"

namespace sv2v {

/// Named arrays plus a string manifest.
///
/// File layout (all integers little-endian u32, payload little-endian f32):
///   magic "SV2VCKPT", version, n_config, {key_len, key, val_len, val}...,
///   n_arrays, {name_len, name, ndim, dims..., payload}...
struct Checkpoint {
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, Tensor>> arrays;

  const Tensor& array(const std::string& name) const;
  const std::string& value(const std::string& key) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Collects parameter values under their names.
std::vector<std::pair<std::string, Tensor>> snapshot(const std::vector<NamedParam>& params);
/// Copies arrays into parameters by name; shapes must match exactly.
void restore(const std::vector<NamedParam>& params, const Checkpoint& ckpt);

}  // namespace sv2v
