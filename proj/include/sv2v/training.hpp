// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sv2v/losses.hpp"
#include "sv2v/shortcut.hpp"
#include "sv2v/teacher.hpp"

namespace sv2v {

/// Adaptive moment estimation over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<NamedParam> params, double lr, double beta1 = 0.5, double beta2 = 0.999,
       double eps = 1e-8);

  /// Applies one update from the accumulated gradients; parameters without a
  /// gradient are left untouched.
  void step();
  void zero_grad() { zero_grads(params_); }
  double learning_rate() const { return lr_; }

 private:
  std::vector<NamedParam> params_;
  std::vector<Tensor> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

struct FramePair {
  int video = 0;
  int reference = 0;
  int current = 0;
};

/// Uniform video, then gap in [1, min(alpha, len - 1)], then reference position.
FramePair sample_frame_pair(const std::vector<int>& video_lengths, int alpha, std::mt19937_64& rng);

/// Teacher features for every frame of every video, computed once because the
/// teacher is frozen during shortcut training.
struct FeatureBank {
  std::vector<std::vector<Tensor>> a;  // output of the encoder split layer
  std::vector<std::vector<Tensor>> f;  // input of the decoder split layer
  std::vector<std::vector<Tensor>> o;  // teacher output frames

  static FeatureBank build(const std::vector<std::vector<Tensor>>& videos,
                           const TeacherGenerator& teacher, const TeacherSplit& split);
  std::vector<int> lengths() const;
};

struct ShortcutTrainConfig {
  int steps = 2000;
  int alpha = 3;
  double lr_shortcut = 2e-4;
  double lr_disc = 2e-5;
  double beta1 = 0.5;
  double beta2 = 0.999;
  LossWeights weights;
  GanMode gan_mode = GanMode::logistic;
  bool use_perceptual = true;
  int disc_width = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StepRecord {
  int step = 0;
  int gap = 0;
  double align = 0, feat = 0, out = 0, perc = 0, gan = 0, tgan = 0, total = 0;
  double d_gan = 0, d_tgan = 0;
};

struct TrainLog {
  std::vector<StepRecord> steps;

  void write_csv(const std::string& path) const;
  /// Mean of `field` over steps [begin, end).
  double window_mean(double StepRecord::*field, int begin, int end) const;
};

/// Trains `shortcut` against a frozen teacher. The teacher's parameters are
/// marked non-trainable for the duration and never receive gradients.
TrainLog train_shortcut(const FeatureBank& bank, const TeacherGenerator& teacher,
                        ShortcutBlock& shortcut, const TeacherSplit& split,
                        const ShortcutTrainConfig& cfg);

struct FeatureErrors {
  double shortcut_l1 = 0.0;  // mean L1(f_hat_t, f_t)
  double copy_l1 = 0.0;      // mean L1(f_ref, f_t)
  int pairs = 0;
};

/// Scores every (keyframe, non-keyframe) pair an alpha schedule would produce.
FeatureErrors evaluate_feature_errors(const FeatureBank& bank, const ShortcutBlock& shortcut,
                                      int alpha);

struct TeacherTrainConfig {
  int steps = 600;
  double lr = 5e-4;
  double lr_disc = 2e-4;
  double gan_weight = 0.05;
  int disc_width = 16;
  std::uint64_t seed = 0;
};

struct TeacherStepRecord {
  int step = 0;
  double l1 = 0, gan = 0, d = 0;
};

/// Paired per-frame training: L1 to the target plus a small patch-GAN term.
std::vector<TeacherStepRecord> train_teacher(const std::vector<std::vector<Tensor>>& sources,
                                             const std::vector<std::vector<Tensor>>& targets,
                                             TeacherGenerator& teacher,
                                             const TeacherTrainConfig& cfg);

void write_teacher_log_csv(const std::string& path, const std::vector<TeacherStepRecord>& log);

}  // namespace sv2v
