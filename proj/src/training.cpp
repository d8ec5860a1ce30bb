// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "sv2v/ops.hpp"
#include "sv2v/parallel.hpp"

namespace sv2v {

Adam::Adam(std::vector<NamedParam> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  SV2V_CHECK(lr > 0 && beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1,
             "invalid Adam hyperparameters");
  for (const auto& p : params_) {
    m_.emplace_back(p.var.shape());
    v_.emplace_back(p.var.shape());
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Var p = params_[i].var;
    if (!p.has_grad()) continue;
    const Tensor& g = p.grad();
    Tensor& w = p.mutable_value();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = beta1_ * m[j] + (1 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1 - beta2_) * g[j] * g[j];
      w[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
}

FramePair sample_frame_pair(const std::vector<int>& video_lengths, int alpha, std::mt19937_64& rng) {
  SV2V_CHECK(alpha >= 1, "frame-pair sampling needs alpha >= 1");
  SV2V_CHECK(!video_lengths.empty(), "frame-pair sampling needs at least one video");
  for (int n : video_lengths)
    SV2V_CHECK(n >= 2, "every training video needs at least 2 frames");
  FramePair fp;
  fp.video = std::uniform_int_distribution<int>(0, static_cast<int>(video_lengths.size()) - 1)(rng);
  const int len = video_lengths[fp.video];
  const int gap = std::uniform_int_distribution<int>(1, std::min(alpha, len - 1))(rng);
  fp.reference = std::uniform_int_distribution<int>(0, len - 1 - gap)(rng);
  fp.current = fp.reference + gap;
  return fp;
}

FeatureBank FeatureBank::build(const std::vector<std::vector<Tensor>>& videos,
                               const TeacherGenerator& teacher, const TeacherSplit& split) {
  FeatureBank bank;
  const int n = static_cast<int>(videos.size());
  bank.a.resize(n);
  bank.f.resize(n);
  bank.o.resize(n);
  parallel_for(n, [&](int v) {
    for (const auto& frame : videos[v]) {
      const Var av = teacher.encode_to(constant(frame), split.encoder_layer);
      const Var fv = teacher.middle_to(av, split.encoder_layer, split.decoder_layer);
      bank.o[v].push_back(teacher.decode_from(fv, split.decoder_layer).value());
      bank.a[v].push_back(av.value());
      bank.f[v].push_back(fv.value());
    }
  });
  return bank;
}

std::vector<int> FeatureBank::lengths() const {
  std::vector<int> n;
  for (const auto& v : a) n.push_back(static_cast<int>(v.size()));
  return n;
}

void ShortcutTrainConfig::validate() const {
  SV2V_CHECK(steps >= 0, "steps must be non-negative");
  SV2V_CHECK(alpha >= 1, "alpha must be >= 1");
  SV2V_CHECK(lr_shortcut > 0 && lr_disc > 0, "learning rates must be positive");
  weights.validate();
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write training log '" + path + "'");
  os << "step,gap,align,feat,out,perc,gan,tgan,total,d_gan,d_tgan\n";
  os << std::setprecision(9);
  for (const auto& r : steps)
    os << r.step << ',' << r.gap << ',' << r.align << ',' << r.feat << ',' << r.out << ','
       << r.perc << ',' << r.gan << ',' << r.tgan << ',' << r.total << ',' << r.d_gan << ','
       << r.d_tgan << '\n';
}

double TrainLog::window_mean(double StepRecord::*field, int begin, int end) const {
  begin = std::max(begin, 0);
  end = std::min(end, static_cast<int>(steps.size()));
  SV2V_CHECK(begin < end, "window_mean: empty window");
  double s = 0;
  for (int i = begin; i < end; ++i) s += steps[i].*field;
  return s / (end - begin);
}

TrainLog train_shortcut(const FeatureBank& bank, const TeacherGenerator& teacher,
                        ShortcutBlock& shortcut, const TeacherSplit& split,
                        const ShortcutTrainConfig& cfg) {
  cfg.validate();
  teacher.set_trainable(false);
  std::mt19937_64 rng(cfg.seed);
  const auto lengths = bank.lengths();
  SV2V_CHECK(!lengths.empty(), "train_shortcut: empty feature bank");
  for (int n : lengths) SV2V_CHECK(n >= 2, "train_shortcut: every video needs at least 2 frames");

  const bool adversarial = cfg.weights.gan > 0 || cfg.weights.tgan > 0;
  const int out_ch = bank.o[0][0].dim(1);
  PatchDiscriminator d(out_ch, cfg.disc_width, cfg.seed + 101);
  TemporalDiscriminator d_t(out_ch, cfg.disc_width, cfg.seed + 202);
  PerceptualExtractor extractor(cfg.seed + 303, out_ch);
  auto d_params = d.parameters();
  for (auto& p : d_t.parameters()) d_params.push_back(p);

  Adam opt_g(shortcut.parameters(), cfg.lr_shortcut, cfg.beta1, cfg.beta2);
  Adam opt_d(d_params, cfg.lr_disc, cfg.beta1, cfg.beta2);

  TrainLog log;
  log.steps.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    const FramePair fp = sample_frame_pair(lengths, cfg.alpha, rng);
    const Var a_ref = constant(bank.a[fp.video][fp.reference]);
    const Var f_ref = constant(bank.f[fp.video][fp.reference]);
    const Var a_t = constant(bank.a[fp.video][fp.current]);
    const Var f_t = constant(bank.f[fp.video][fp.current]);
    const Var o_t = constant(bank.o[fp.video][fp.current]);
    const Var o_ref = constant(bank.o[fp.video][fp.reference]);

    // Generator (shortcut) update; discriminator weights are frozen here.
    nn::set_trainable(d_params, false);
    opt_g.zero_grad();
    const ShortcutOutput s = shortcut.forward(f_ref, a_ref, a_t, true);
    const Var o_hat = teacher.decode_from(s.features, split.decoder_layer);
    LossComponents c;
    c.align = loss_align(f_t, s.aligned_reference_full);
    const DistillLosses dl = loss_distill(f_t, s.features, o_t, o_hat);
    c.feat = dl.feat;
    c.out = dl.out;
    if (cfg.use_perceptual && cfg.weights.perc > 0) c.perc = loss_perceptual(o_t, o_hat, extractor);
    if (adversarial) {
      const GanLosses g = loss_gan(d, d_t, o_ref, o_t, o_hat, GanRole::generator, cfg.gan_mode);
      c.gan = g.gan;
      c.tgan = g.tgan;
    }
    const Var total = total_loss(c, cfg.weights);
    backward(total);
    opt_g.step();

    StepRecord r;
    r.step = step;
    r.gap = fp.current - fp.reference;
    auto val = [](const Var& v) { return v.defined() ? v.value()[0] : 0.0; };
    r.align = val(c.align);
    r.feat = val(c.feat);
    r.out = val(c.out);
    r.perc = val(c.perc);
    r.gan = val(c.gan);
    r.tgan = val(c.tgan);
    r.total = val(total);

    if (adversarial) {
      nn::set_trainable(d_params, true);
      opt_d.zero_grad();
      const GanLosses dlosses =
          loss_gan(d, d_t, o_ref, o_t, o_hat, GanRole::discriminator, cfg.gan_mode);
      backward(weighted_sum({dlosses.gan, dlosses.tgan}, {cfg.weights.gan, cfg.weights.tgan}));
      opt_d.step();
      r.d_gan = dlosses.gan.value()[0];
      r.d_tgan = dlosses.tgan.value()[0];
    }
    log.steps.push_back(r);
  }
  nn::set_trainable(d_params, true);
  return log;
}

FeatureErrors evaluate_feature_errors(const FeatureBank& bank, const ShortcutBlock& shortcut,
                                      int alpha) {
  SV2V_CHECK(alpha >= 2, "evaluation needs alpha >= 2 so that shortcut frames exist");
  FeatureErrors e;
  for (std::size_t v = 0; v < bank.a.size(); ++v) {
    const int n = static_cast<int>(bank.a[v].size());
    for (int t = 0; t < n; ++t) {
      if (t % alpha == 0) continue;
      const int ref = t - t % alpha;
      const Tensor f_hat = shortcut.estimate(bank.f[v][ref], bank.a[v][ref], bank.a[v][t]);
      e.shortcut_l1 += mean_abs_diff(f_hat, bank.f[v][t]);
      e.copy_l1 += mean_abs_diff(bank.f[v][ref], bank.f[v][t]);
      ++e.pairs;
    }
  }
  SV2V_CHECK(e.pairs > 0, "evaluation found no shortcut frames");
  e.shortcut_l1 /= e.pairs;
  e.copy_l1 /= e.pairs;
  return e;
}

std::vector<TeacherStepRecord> train_teacher(const std::vector<std::vector<Tensor>>& sources,
                                             const std::vector<std::vector<Tensor>>& targets,
                                             TeacherGenerator& teacher,
                                             const TeacherTrainConfig& cfg) {
  SV2V_CHECK(!sources.empty() && sources.size() == targets.size(),
             "train_teacher: need matching, non-empty source and target sets");
  std::vector<std::pair<int, int>> frames;
  for (std::size_t v = 0; v < sources.size(); ++v) {
    SV2V_CHECK(sources[v].size() == targets[v].size(), "train_teacher: frame count mismatch");
    for (std::size_t t = 0; t < sources[v].size(); ++t)
      frames.emplace_back(static_cast<int>(v), static_cast<int>(t));
  }
  SV2V_CHECK(!frames.empty(), "train_teacher: no frames");
  teacher.set_trainable(true);
  std::mt19937_64 rng(cfg.seed);
  const int out_ch = targets[0][0].dim(1);
  PatchDiscriminator d(out_ch, cfg.disc_width, cfg.seed + 11);
  Adam opt(teacher.parameters(), cfg.lr, 0.5, 0.999);
  Adam opt_d(d.parameters(), cfg.lr_disc, 0.5, 0.999);
  std::uniform_int_distribution<std::size_t> pick(0, frames.size() - 1);

  std::vector<TeacherStepRecord> log;
  for (int step = 0; step < cfg.steps; ++step) {
    const auto [v, t] = frames[pick(rng)];
    const Var src = constant(sources[v][t]);
    const Var tgt = constant(targets[v][t]);
    nn::set_trainable(d.parameters(), false);
    opt.zero_grad();
    const Var out = teacher.forward(src);
    const Var l1 = l1_mean(out, tgt);
    TeacherStepRecord r;
    r.step = step;
    r.l1 = l1.value()[0];
    if (cfg.gan_weight > 0) {
      const Var g = bce_with_logits(d(out), 1.0);
      backward(weighted_sum({l1, g}, {1.0, cfg.gan_weight}));
      r.gan = g.value()[0];
    } else {
      backward(l1);
    }
    opt.step();
    if (cfg.gan_weight > 0) {
      nn::set_trainable(d.parameters(), true);
      opt_d.zero_grad();
      const Var dl = add(bce_with_logits(d(tgt), 1.0), bce_with_logits(d(detach(out)), 0.0));
      backward(dl);
      opt_d.step();
      r.d = dl.value()[0];
    }
    log.push_back(r);
  }
  teacher.set_trainable(false);
  return log;
}

void write_teacher_log_csv(const std::string& path, const std::vector<TeacherStepRecord>& log) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write training log '" + path + "'");
  os << "step,l1,gan,d\n" << std::setprecision(9);
  for (const auto& r : log) os << r.step << ',' << r.l1 << ',' << r.gan << ',' << r.d << '\n';
}

}  // namespace sv2v
