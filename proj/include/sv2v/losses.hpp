// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sv2v/nn.hpp"

namespace sv2v {

/// Relative weights of the six objective terms.
struct LossWeights {
  double align = 5.0;
  double feat = 5.0;
  double out = 10.0;
  double perc = 10.0;
  double gan = 1.0;
  double tgan = 1.0;

  void validate() const;
};

/// Values of the six objective terms, in the same order as LossWeights.
struct LossComponents {
  Var align, feat, out, perc, gan, tgan;
};

enum class GanMode { logistic, least_squares };
GanMode gan_mode_from_string(std::string_view s);
std::string to_string(GanMode m);

enum class GanRole { generator, discriminator };

/// mean |f_t - f*_ref|
Var loss_align(const Var& f_t, const Var& f_star_ref);

struct DistillLosses {
  Var feat;
  Var out;
};
/// Feature-level and output-level mean absolute differences.
DistillLosses loss_distill(const Var& f_t, const Var& f_hat, const Var& o_t, const Var& o_hat);

/// Frozen, randomly initialised 4-stage convolutional pyramid (stride-2 3x3
/// convolutions with leaky rectifiers) standing in for a pretrained classifier.
class PerceptualExtractor {
 public:
  explicit PerceptualExtractor(std::uint64_t seed = 7, int in_channels = 3,
                               std::vector<int> widths = {16, 32, 64, 64});

  std::vector<Var> features(const Var& image) const;
  int stages() const { return static_cast<int>(stages_.size()); }
  std::vector<NamedParam> parameters() const;

 private:
  std::vector<nn::Conv2d> stages_;
};

/// sum over the first `stages` stages (all when < 0) of mean |phi_j(O) - phi_j(O_hat)|.
Var loss_perceptual(const Var& o_t, const Var& o_hat, const PerceptualExtractor& extractor,
                    int stages = -1);

/// Three-layer patch discriminator emitting a logit map.
class PatchDiscriminator {
 public:
  PatchDiscriminator(int in_channels, int width, std::uint64_t seed);
  Var operator()(const Var& image) const;
  std::vector<NamedParam> parameters() const;

 private:
  nn::Conv2d c0_, c1_, c2_;
};

/// Temporal discriminator: three 3-D convolutions over the (O_ref, O_t) stack.
class TemporalDiscriminator {
 public:
  TemporalDiscriminator(int in_channels, int width, std::uint64_t seed);
  Var operator()(const Var& reference, const Var& current) const;
  std::vector<NamedParam> parameters() const;

 private:
  nn::Conv3d c0_, c1_, c2_;
};

struct GanLosses {
  Var gan;
  Var tgan;
};

/// Adversarial terms. Teacher outputs are the real class, student outputs fake.
/// Generator role: non-saturating  -log D(O_hat). Discriminator role:
/// -log D(O_t) - log(1 - D(O_hat)). Least-squares mode swaps the log terms for
/// squared distances to the 1/0 targets.
GanLosses loss_gan(const PatchDiscriminator& d, const TemporalDiscriminator& d_t, const Var& o_ref,
                   const Var& o_t, const Var& o_hat, GanRole role,
                   GanMode mode = GanMode::logistic);

/// Weighted sum of the six terms; undefined components count as zero.
Var total_loss(const LossComponents& c, const LossWeights& w);

}  // namespace sv2v
