// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/shortcut.hpp"

#include <algorithm>
#include <cmath>

#include "sv2v/ops.hpp"

namespace sv2v {

using deform::BlendingMask;
using deform::OffsetField;
using deform::OffsetKind;

ChannelVariant channel_variant_from_string(std::string_view s) {
  if (s == "full") return ChannelVariant::full;
  if (s == "half") return ChannelVariant::half;
  if (s == "quarter") return ChannelVariant::quarter;
  throw std::invalid_argument("unknown channel variant '" + std::string(s) +
                              "' (expected full, half or quarter)");
}

std::string to_string(ChannelVariant v) {
  switch (v) {
    case ChannelVariant::full: return "full";
    case ChannelVariant::half: return "half";
    case ChannelVariant::quarter: return "quarter";
  }
  return "full";
}

BlendMode blend_mode_from_string(std::string_view s) {
  if (s == "adaptive") return BlendMode::adaptive;
  if (s == "fixed_half") return BlendMode::fixed_half;
  if (s == "reference_only") return BlendMode::reference_only;
  if (s == "current_only") return BlendMode::current_only;
  throw std::invalid_argument("unknown blend mode '" + std::string(s) + "'");
}

std::string to_string(BlendMode m) {
  switch (m) {
    case BlendMode::adaptive: return "adaptive";
    case BlendMode::fixed_half: return "fixed_half";
    case BlendMode::reference_only: return "reference_only";
    case BlendMode::current_only: return "current_only";
  }
  return "adaptive";
}

ShortcutConfig ShortcutConfig::for_channels(int channels, ChannelVariant variant) {
  const int divisor = variant == ChannelVariant::full ? 2 : variant == ChannelVariant::half ? 4 : 8;
  ShortcutConfig cfg;
  cfg.channels = channels;
  cfg.reduced_channels = std::max(1, channels / divisor);
  cfg.hidden_channels = cfg.reduced_channels;
  return cfg;
}

void ShortcutConfig::validate() const {
  SV2V_CHECK(channels >= 1 && reduced_channels >= 1 && hidden_channels >= 1,
             "shortcut channel counts must be positive");
  SV2V_CHECK(reduced_channels <= channels, "reduced channels must not exceed input channels");
  SV2V_CHECK(kernel_size >= 1 && kernel_size % 2 == 1, "shortcut kernel size must be odd");
}

ShortcutBlock::ShortcutBlock(const ShortcutConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(seed);
  const int C = cfg_.channels, R = cfg_.reduced_channels, Hd = cfg_.hidden_channels;
  const int k = cfg_.kernel_size, Np = cfg_.kernel_points(), pad = k / 2;
  reduce_a_ = parameter(nn::kaiming_uniform({R, C, 1, 1}, rng));
  reduce_f_ = parameter(nn::kaiming_uniform({R, C, 1, 1}, rng));
  global_gen0_ = nn::Conv2d(2 * R, Hd, k, 1, pad, true, rng, std::sqrt(2.0));
  global_gen1_ = nn::Conv2d(Hd, 2, k, 1, pad, true, rng);
  global_gen1_.zero_init();
  w_g_ = parameter(nn::kaiming_uniform({R, R, k, k}, rng));
  local_gen0_ = nn::Conv2d(2 * R, Hd, k, 1, pad, true, rng, std::sqrt(2.0));
  local_gen1_ = nn::Conv2d(Hd, Hd, k, 1, pad, true, rng, std::sqrt(2.0));
  offset_head_ = nn::Conv2d(Hd, 2 * Np, k, 1, pad, true, rng);
  offset_head_.zero_init();
  mask_head_ = nn::Conv2d(Hd, Np, k, 1, pad, true, rng);
  mask_head_.zero_init();
  w_l_ = parameter(nn::kaiming_uniform({R, R, k, k}, rng));
  reconstruct_ = parameter(nn::kaiming_uniform({C, R, 1, 1}, rng));
}

Var ShortcutBlock::reduce_channels(const Var& x, FeatureSpace which) const {
  check_feature_map(x.value(), "reduce_channels input");
  SV2V_CHECK(x.dim(1) == cfg_.channels, "reduce_channels: expected " +
                                            std::to_string(cfg_.channels) + " channels, got " +
                                            shape_str(x.shape()));
  return conv2d(x, which == FeatureSpace::a ? reduce_a_ : reduce_f_, Var(), 1, 0);
}

Var ShortcutBlock::global_offsets(const Var& a_ref, const Var& a_t) const {
  SV2V_CHECK(a_ref.value().same_shape(a_t.value()),
             "global_offsets: reference and current features differ in shape: " +
                 shape_str(a_ref.shape()) + " vs " + shape_str(a_t.shape()));
  Var x = concat_channels(downsample2(a_ref), downsample2(a_t));
  return global_gen1_(leaky_relu(global_gen0_(x)));
}

ShortcutBlock::LocalFields ShortcutBlock::local_offsets_and_mask(const Var& a_ref_aligned,
                                                                 const Var& a_t) const {
  SV2V_CHECK(a_ref_aligned.value().same_shape(a_t.value()),
             "local_offsets_and_mask: input shapes differ: " + shape_str(a_ref_aligned.shape()) +
                 " vs " + shape_str(a_t.shape()));
  Var h = leaky_relu(local_gen1_(leaky_relu(local_gen0_(concat_channels(a_ref_aligned, a_t)))));
  return {OffsetField{OffsetKind::local, offset_head_(h)}, BlendingMask{sigmoid(mask_head_(h))}};
}

ReducedReference ShortcutBlock::reduce_reference(const Var& f_ref, const Var& a_ref) const {
  SV2V_CHECK(f_ref.value().ndim() == 4 && a_ref.value().ndim() == 4,
             "shortcut inputs must be 4-D feature maps");
  SV2V_CHECK(f_ref.dim(0) == a_ref.dim(0) && f_ref.dim(2) == a_ref.dim(2) && f_ref.dim(3) == a_ref.dim(3),
             "shortcut: f_ref " + shape_str(f_ref.shape()) + " and a_ref " + shape_str(a_ref.shape()) +
                 " must share batch and spatial size");
  ReducedReference r;
  r.a = reduce_channels(a_ref, FeatureSpace::a);
  r.f = reduce_channels(f_ref, FeatureSpace::f);
  r.a_coarse = downsample2(r.a);
  r.f_coarse = downsample2(r.f);
  return r;
}

ShortcutOutput ShortcutBlock::forward(const Var& f_ref, const Var& a_ref, const Var& a_t,
                                      bool return_aligned) const {
  return forward(reduce_reference(f_ref, a_ref), a_t, return_aligned);
}

ShortcutOutput ShortcutBlock::forward(const ReducedReference& ref, const Var& a_t,
                                      bool return_aligned) const {
  SV2V_CHECK(a_t.value().ndim() == 4, "shortcut inputs must be 4-D feature maps");
  SV2V_CHECK(ref.a.dim(0) == a_t.dim(0) && ref.a.dim(2) == a_t.dim(2) && ref.a.dim(3) == a_t.dim(3),
             "shortcut: reference features " + shape_str(ref.a.shape()) + " and a_t " +
                 shape_str(a_t.shape()) + " must share batch and spatial size");
  const int H = a_t.dim(2), W = a_t.dim(3);
  const Var a_t_r = reduce_channels(a_t, FeatureSpace::a);

  ShortcutOutput out;
  out.global_offsets =
      global_gen1_(leaky_relu(global_gen0_(concat_channels(ref.a_coarse, downsample2(a_t_r)))));
  const Var f_aligned = deform::global_align_coarse(w_g_, ref.f_coarse, out.global_offsets, H, W);
  const Var a_aligned = deform::global_align_coarse(w_g_, ref.a_coarse, out.global_offsets, H, W);

  LocalFields local = local_offsets_and_mask(a_aligned, a_t_r);
  out.local_offsets = local.offsets.data;
  const Shape ms = local.mask.data.shape();
  switch (cfg_.blend) {
    case BlendMode::adaptive: break;
    case BlendMode::fixed_half: local.mask.data = constant(Tensor(ms, 0.5)); break;
    case BlendMode::reference_only: local.mask.data = constant(Tensor(ms, 0.0)); break;
    case BlendMode::current_only: local.mask.data = constant(Tensor(ms, 1.0)); break;
  }
  out.blend_mask = local.mask.data;

  const Var blended = deform::adabd(w_l_, a_t_r, f_aligned, local.offsets, local.mask);
  out.features = conv2d(blended, reconstruct_, Var(), 1, 0);

  if (return_aligned) {
    const Var ones = constant(Tensor(ms, 1.0));
    out.aligned_reference = deform::deformable_conv(w_l_, f_aligned, local.offsets, BlendingMask{ones});
    out.aligned_reference_full = conv2d(out.aligned_reference, reconstruct_, Var(), 1, 0);
  }
  return out;
}

Tensor ShortcutBlock::estimate(const Tensor& f_ref, const Tensor& a_ref, const Tensor& a_t) const {
  return forward(constant(f_ref), constant(a_ref), constant(a_t)).features.value();
}

Tensor ShortcutBlock::estimate(const ReducedReference& ref, const Tensor& a_t) const {
  return forward(ref, constant(a_t)).features.value();
}

std::vector<NamedParam> ShortcutBlock::parameters() const {
  std::vector<NamedParam> out;
  out.push_back({"reduce_a.weight", reduce_a_});
  out.push_back({"reduce_f.weight", reduce_f_});
  global_gen0_.append_params("global_gen.0", out);
  global_gen1_.append_params("global_gen.1", out);
  out.push_back({"w_g", w_g_});
  local_gen0_.append_params("local_gen.0", out);
  local_gen1_.append_params("local_gen.1", out);
  offset_head_.append_params("local_gen.offset_head", out);
  mask_head_.append_params("local_gen.mask_head", out);
  out.push_back({"w_l", w_l_});
  out.push_back({"reconstruct.weight", reconstruct_});
  return out;
}

cost::NetworkDescription ShortcutBlock::describe(int d) const {
  using cost::LayerKind;
  const int C = cfg_.channels, R = cfg_.reduced_channels, Hd = cfg_.hidden_channels;
  const int k = cfg_.kernel_size, Np = cfg_.kernel_points(), pad = k / 2;
  cost::NetworkDescription net;
  net.name = "shortcut";
  auto& L = net.layers;
  L.push_back({"reduce_a(a_t)", LayerKind::conv, C, R, 1, 1, 0, 0, d});
  L.push_back({"down(a_t)", LayerKind::resize, R, R, 1, 1, 0, 0, d, 2 * d});
  L.push_back({"global_gen.0", LayerKind::conv, 2 * R, Hd, k, 1, pad, 0, 2 * d, 1, true});
  L.push_back({"global_gen.1", LayerKind::conv, Hd, 2, k, 1, pad, 0, 2 * d, 1, true});
  L.push_back({"global_align(f_ref)", LayerKind::deform_conv, R, R, k, 1, pad, 0, 2 * d});
  L.push_back({"global_align(a_ref)", LayerKind::deform_conv, R, R, k, 1, pad, 0, 2 * d});
  for (const char* n : {"align.up(f_ref)", "align.up(a_ref)"})
    L.push_back({n, LayerKind::resize, R, R, 1, 1, 0, 0, 2 * d, d});
  L.push_back({"local_gen.0", LayerKind::conv, 2 * R, Hd, k, 1, pad, 0, d, 1, true});
  L.push_back({"local_gen.1", LayerKind::conv, Hd, Hd, k, 1, pad, 0, d, 1, true});
  L.push_back({"local_gen.offset_head", LayerKind::conv, Hd, 2 * Np, k, 1, pad, 0, d, 1, true});
  L.push_back({"local_gen.mask_head", LayerKind::conv, Hd, Np, k, 1, pad, 0, d, 1, true});
  L.push_back({"adabd", LayerKind::adabd, R, R, k, 1, pad, 0, d});
  L.push_back({"reconstruct", LayerKind::conv, R, C, 1, 1, 0, 0, d});
  return net;
}

cost::NetworkDescription ShortcutBlock::describe_reference(int d) const {
  using cost::LayerKind;
  const int C = cfg_.channels, R = cfg_.reduced_channels;
  cost::NetworkDescription net;
  net.name = "shortcut.reference";
  auto& L = net.layers;
  L.push_back({"reduce_a(a_ref)", LayerKind::conv, C, R, 1, 1, 0, 0, d});
  L.push_back({"reduce_f(f_ref)", LayerKind::conv, C, R, 1, 1, 0, 0, d});
  L.push_back({"down(a_ref)", LayerKind::resize, R, R, 1, 1, 0, 0, d, 2 * d});
  L.push_back({"down(f_ref)", LayerKind::resize, R, R, 1, 1, 0, 0, d, 2 * d});
  return net;
}

Checkpoint ShortcutBlock::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.config["kind"] = "shortcut";
  ckpt.config["channels"] = std::to_string(cfg_.channels);
  ckpt.config["reduced_channels"] = std::to_string(cfg_.reduced_channels);
  ckpt.config["hidden_channels"] = std::to_string(cfg_.hidden_channels);
  ckpt.config["kernel_size"] = std::to_string(cfg_.kernel_size);
  ckpt.config["blend_mode"] = to_string(cfg_.blend);
  ckpt.arrays = snapshot(parameters());
  return ckpt;
}

ShortcutBlock ShortcutBlock::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.value("kind") != "shortcut") throw IoError("checkpoint is not a shortcut checkpoint");
  ShortcutConfig cfg;
  cfg.channels = std::stoi(ckpt.value("channels"));
  cfg.reduced_channels = std::stoi(ckpt.value("reduced_channels"));
  cfg.hidden_channels = std::stoi(ckpt.value("hidden_channels"));
  cfg.kernel_size = std::stoi(ckpt.value("kernel_size"));
  cfg.blend = blend_mode_from_string(ckpt.value("blend_mode"));
  ShortcutBlock block(cfg, 0);
  restore(block.parameters(), ckpt);
  return block;
}

}  // namespace sv2v
