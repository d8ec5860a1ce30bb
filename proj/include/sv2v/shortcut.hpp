// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sv2v/checkpoint.hpp"
#include "sv2v/cost.hpp"
#include "sv2v/deform.hpp"
#include "sv2v/nn.hpp"

namespace sv2v {

enum class ChannelVariant { full, half, quarter };
ChannelVariant channel_variant_from_string(std::string_view s);
std::string to_string(ChannelVariant v);

/// How the blend mask is produced. Everything but `adaptive` is an ablation.
enum class BlendMode { adaptive, fixed_half, reference_only, current_only };
BlendMode blend_mode_from_string(std::string_view s);
std::string to_string(BlendMode m);

enum class FeatureSpace { a, f };

struct ShortcutConfig {
  int channels = 64;          // C at the split layers
  int reduced_channels = 32;  // C_r
  int hidden_channels = 16;   // offset/mask generator width
  int kernel_size = 3;
  BlendMode blend = BlendMode::adaptive;

  int kernel_points() const { return kernel_size * kernel_size; }

  /// C_r = C/2 scaled by 1, 1/2 or 1/4; generator width C_r.
  static ShortcutConfig for_channels(int channels, ChannelVariant variant = ChannelVariant::full);
  void validate() const;
};

struct ShortcutOutput {
  Var features;          // f_hat_t, channels C
  Var global_offsets;    // [B, 2, H/2, W/2]
  Var local_offsets;     // [B, 2*N_p, H, W]
  Var blend_mask;        // [B, N_p, H, W]
  Var aligned_reference;       // f*_ref in reduced space (only with return_aligned)
  Var aligned_reference_full;  // f*_ref mapped back to C channels by the reconstruction layer
};

/// The part of a forward pass that depends only on the reference features, so
/// it can be computed once per keyframe interval.
struct ReducedReference {
  Var a;         // reduced a_ref
  Var f;         // reduced f_ref
  Var a_coarse;  // downsample2(a)
  Var f_coarse;  // downsample2(f)
};

/// Estimates decoder features of the current frame from cached reference
/// features (f_ref, a_ref) and the current encoder features a_t.
class ShortcutBlock {
 public:
  ShortcutBlock(const ShortcutConfig& cfg, std::uint64_t seed);

  const ShortcutConfig& config() const { return cfg_; }
  void set_blend_mode(BlendMode m) { cfg_.blend = m; }

  Var reduce_channels(const Var& x, FeatureSpace which) const;
  /// Reduced a_ref, a_t -> global offsets on the half-resolution grid.
  Var global_offsets(const Var& a_ref, const Var& a_t) const;
  struct LocalFields {
    deform::OffsetField offsets;
    deform::BlendingMask mask;
  };
  /// Reduced, globally aligned a_ref and reduced a_t -> local offsets and mask.
  LocalFields local_offsets_and_mask(const Var& a_ref_aligned, const Var& a_t) const;

  ReducedReference reduce_reference(const Var& f_ref, const Var& a_ref) const;

  ShortcutOutput forward(const Var& f_ref, const Var& a_ref, const Var& a_t,
                         bool return_aligned = false) const;
  /// Same result as forward(f_ref, a_ref, a_t) given reduce_reference(f_ref, a_ref).
  ShortcutOutput forward(const ReducedReference& ref, const Var& a_t, bool return_aligned = false) const;
  Tensor estimate(const Tensor& f_ref, const Tensor& a_ref, const Tensor& a_t) const;
  Tensor estimate(const ReducedReference& ref, const Tensor& a_t) const;

  // Weight handles, exposed for analysis and tests.
  const Var& reduce_a_weight() const { return reduce_a_; }
  const Var& reduce_f_weight() const { return reduce_f_; }
  const Var& global_kernel() const { return w_g_; }
  const Var& local_kernel() const { return w_l_; }
  const Var& reconstruct_weight() const { return reconstruct_; }

  std::vector<NamedParam> parameters() const;

  /// Per-frame inference layers; in_div is relative to the split features scaled by
  /// feature_div. Excludes reduce_reference, see describe_reference.
  cost::NetworkDescription describe(int feature_div = 1) const;
  cost::NetworkDescription describe_reference(int feature_div = 1) const;

  Checkpoint to_checkpoint() const;
  static ShortcutBlock from_checkpoint(const Checkpoint& ckpt);

 private:
  ShortcutConfig cfg_;
  Var reduce_a_, reduce_f_;  // [C_r, C, 1, 1]
  nn::Conv2d global_gen0_, global_gen1_;
  Var w_g_;  // [C_r, C_r, k, k]
  nn::Conv2d local_gen0_, local_gen1_;
  nn::Conv2d offset_head_, mask_head_;
  Var w_l_;          // [C_r, C_r, k, k]
  Var reconstruct_;  // [C, C_r, 1, 1]
};

}  // namespace sv2v
