// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>

#include "sv2v/shortcut.hpp"

namespace fixture {

inline sv2v::Var param_named(const sv2v::ShortcutBlock& s, const std::string& name) {
  for (auto& p : s.parameters())
    if (p.name == name) return p.var;
  throw std::invalid_argument("no parameter " + name);
}

/// Gives the zero-initialised offset and mask heads small random weights and
/// biases near +0.5, so every sampling coordinate sits around half a pixel off
/// the grid and the mask leaves 0.5.
inline void perturb_heads(const sv2v::ShortcutBlock& s, std::mt19937_64& rng, double weight_scale = 0.02) {
  std::uniform_real_distribution<double> w(-weight_scale, weight_scale), b(0.45, 0.55);
  for (const char* head : {"global_gen.1", "local_gen.offset_head", "local_gen.mask_head"}) {
    for (auto& v : param_named(s, std::string(head) + ".weight").mutable_value().values()) v = w(rng);
    for (auto& v : param_named(s, std::string(head) + ".bias").mutable_value().values()) v = b(rng);
  }
}

}  // namespace fixture
