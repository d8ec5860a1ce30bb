// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/losses.hpp"

#include <cmath>
#include <utility>

#include "sv2v/ops.hpp"

namespace sv2v {

void LossWeights::validate() const {
  for (double w : {align, feat, out, perc, gan, tgan})
    SV2V_CHECK(w >= 0.0 && std::isfinite(w), "loss weights must be finite and non-negative");
}

GanMode gan_mode_from_string(std::string_view s) {
  if (s == "logistic") return GanMode::logistic;
  if (s == "least_squares" || s == "lsgan") return GanMode::least_squares;
  throw std::invalid_argument("unknown gan mode '" + std::string(s) + "'");
}

std::string to_string(GanMode m) { return m == GanMode::logistic ? "logistic" : "least_squares"; }

Var loss_align(const Var& f_t, const Var& f_star_ref) { return l1_mean(f_t, f_star_ref); }

DistillLosses loss_distill(const Var& f_t, const Var& f_hat, const Var& o_t, const Var& o_hat) {
  Var feat = l1_mean(f_t, f_hat);
  Var out = l1_mean(o_t, o_hat);
  return {std::move(feat), std::move(out)};
}

PerceptualExtractor::PerceptualExtractor(std::uint64_t seed, int in_channels, std::vector<int> widths) {
  std::mt19937_64 rng(seed);
  int c = in_channels;
  for (int w : widths) {
    stages_.emplace_back(c, w, 3, 2, 1, true, rng, std::sqrt(2.0));
    c = w;
  }
  nn::set_trainable(parameters(), false);
}

std::vector<Var> PerceptualExtractor::features(const Var& image) const {
  std::vector<Var> out;
  Var x = image;
  for (const auto& s : stages_) {
    x = leaky_relu(s(x));
    out.push_back(x);
  }
  return out;
}

std::vector<NamedParam> PerceptualExtractor::parameters() const {
  std::vector<NamedParam> out;
  for (std::size_t i = 0; i < stages_.size(); ++i)
    stages_[i].append_params("stage" + std::to_string(i), out);
  return out;
}

Var loss_perceptual(const Var& o_t, const Var& o_hat, const PerceptualExtractor& extractor,
                    int stages) {
  SV2V_CHECK(o_t.value().same_shape(o_hat.value()),
             "loss_perceptual: shape mismatch " + shape_str(o_t.shape()) + " vs " +
                 shape_str(o_hat.shape()));
  const auto fa = extractor.features(o_t);
  const auto fb = extractor.features(o_hat);
  const int n = stages < 0 ? extractor.stages() : std::min(stages, extractor.stages());
  SV2V_CHECK(n >= 1, "loss_perceptual: need at least one stage");
  std::vector<Var> terms;
  for (int i = 0; i < n; ++i) terms.push_back(l1_mean(fa[i], fb[i]));
  return weighted_sum(terms, std::vector<double>(terms.size(), 1.0));
}

PatchDiscriminator::PatchDiscriminator(int in_channels, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  c0_ = nn::Conv2d(in_channels, width, 4, 2, 1, true, rng, std::sqrt(2.0));
  c1_ = nn::Conv2d(width, 2 * width, 4, 2, 1, true, rng, std::sqrt(2.0));
  c2_ = nn::Conv2d(2 * width, 1, 3, 1, 1, true, rng);
}

Var PatchDiscriminator::operator()(const Var& image) const {
  return c2_(leaky_relu(c1_(leaky_relu(c0_(image)))));
}

std::vector<NamedParam> PatchDiscriminator::parameters() const {
  std::vector<NamedParam> out;
  c0_.append_params("d.0", out);
  c1_.append_params("d.1", out);
  c2_.append_params("d.2", out);
  return out;
}

TemporalDiscriminator::TemporalDiscriminator(int in_channels, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  c0_ = nn::Conv3d(in_channels, width, {2, 4, 4}, {1, 2, 2}, {0, 1, 1}, rng, std::sqrt(2.0));
  c1_ = nn::Conv3d(width, 2 * width, {1, 4, 4}, {1, 2, 2}, {0, 1, 1}, rng, std::sqrt(2.0));
  c2_ = nn::Conv3d(2 * width, 1, {1, 3, 3}, {1, 1, 1}, {0, 1, 1}, rng);
}

Var TemporalDiscriminator::operator()(const Var& reference, const Var& current) const {
  return c2_(leaky_relu(c1_(leaky_relu(c0_(stack_time(reference, current))))));
}

std::vector<NamedParam> TemporalDiscriminator::parameters() const {
  std::vector<NamedParam> out;
  c0_.append_params("dt.0", out);
  c1_.append_params("dt.1", out);
  c2_.append_params("dt.2", out);
  return out;
}

namespace {

Var adversarial(const Var& logits, double target, GanMode mode) {
  return mode == GanMode::logistic ? bce_with_logits(logits, target) : mse_to_value(logits, target);
}

}  // namespace

GanLosses loss_gan(const PatchDiscriminator& d, const TemporalDiscriminator& d_t, const Var& o_ref,
                   const Var& o_t, const Var& o_hat, GanRole role, GanMode mode) {
  if (role == GanRole::generator)
    return {adversarial(d(o_hat), 1.0, mode), adversarial(d_t(o_ref, o_hat), 1.0, mode)};
  const Var fake = detach(o_hat);
  const Var gan = add(adversarial(d(o_t), 1.0, mode), adversarial(d(fake), 0.0, mode));
  const Var tgan = add(adversarial(d_t(o_ref, o_t), 1.0, mode),
                       adversarial(d_t(o_ref, fake), 0.0, mode));
  return {gan, tgan};
}

Var total_loss(const LossComponents& c, const LossWeights& w) {
  w.validate();
  std::vector<Var> terms;
  std::vector<double> weights;
  auto push = [&](const Var& v, double weight) {
    if (!v.defined()) return;
    terms.push_back(v);
    weights.push_back(weight);
  };
  push(c.align, w.align);
  push(c.feat, w.feat);
  push(c.out, w.out);
  push(c.perc, w.perc);
  push(c.gan, w.gan);
  push(c.tgan, w.tgan);
  if (terms.empty()) return constant(Tensor({1}, 0.0));
  return weighted_sum(terms, weights);
}

}  // namespace sv2v
