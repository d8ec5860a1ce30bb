// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "sv2v/analysis.hpp"
#include "sv2v/dataio.hpp"
#include "sv2v/deform.hpp"
#include "sv2v/scheduler.hpp"
#include "sv2v/training.hpp"

using namespace sv2v;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

deform::OffsetField local(const Tensor& t) { return {deform::OffsetKind::local, constant(t)}; }
deform::BlendingMask blend(const Tensor& t) { return {constant(t)}; }

struct RandomInstance {
  Tensor w, x, a, off, m;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ch(1, 8), co(1, 8), hw(1, 16), kk(0, 2), bb(1, 2);
  const int c = ch(rng), o = co(rng), h = hw(rng), w = hw(rng), k = 2 * kk(rng) + 1, b = bb(rng);
  const int np = k * k;
  return {Tensor::randn({o, c, k, k}, rng, 1.0), Tensor::randn({b, c, h, w}, rng, 1.0),
          Tensor::randn({b, c, h, w}, rng, 1.0), Tensor::randn({b, 2 * np, h, w}, rng, 2.0),
          Tensor::uniform({b, np, h, w}, rng, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------

Outcome operator_reduction() {
  std::mt19937_64 rng(1001);
  double worst = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto in = random_instance(rng);
    const Tensor zero(in.off.shape()), ones(in.m.shape(), 1.0);
    const Tensor got = deform::deformable_conv(constant(in.w), constant(in.x), local(zero), blend(ones)).value();
    worst = std::max(worst, max_abs_diff(got, oracle::conv2d(in.x, in.w, nullptr, 1, in.w.dim(2) / 2)));
  }
  return {worst < 1e-5, fmt("%d instances, max abs diff %.3g (tol 1e-5)", n, worst)};
}

Outcome fused_equivalence() {
  std::mt19937_64 rng(1002);
  double worst = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto in = random_instance(rng);
    Tensor inv = in.m;
    for (auto& v : inv.values()) v = 1.0 - v;
    const Tensor fused =
        deform::adabd(constant(in.w), constant(in.a), constant(in.x), local(in.off), blend(in.m)).value();
    const Tensor two_call =
        deform::deformable_conv(constant(in.w), constant(in.a), local(Tensor(in.off.shape())), blend(in.m)).value() +
        deform::deformable_conv(constant(in.w), constant(in.x), local(in.off), blend(inv)).value();
    worst = std::max(worst, max_abs_diff(fused, two_call));
  }
  return {worst < 1e-5, fmt("%d instances, max abs diff %.3g (tol 1e-5)", n, worst)};
}

Outcome gradient_correctness() {
  std::mt19937_64 rng(1003);
  double worst = 0;
  int checked = 0;
  auto track = [&](const oracle::GradCheck& g) {
    worst = std::max(worst, g.rel_error);
    checked += static_cast<int>(g.checked);
  };

  for (int trial = 0; trial < 5; ++trial) {
    Var w = parameter(Tensor::randn({3, 2, 3, 3}, rng, 1.0));
    Var x = parameter(Tensor::randn({1, 2, 7, 6}, rng, 1.0));
    Var off = parameter(oracle::off_grid_offsets({1, 18, 7, 6}, rng, 2));
    Var m = parameter(Tensor::uniform({1, 9, 7, 6}, rng, 0.05, 0.95));
    const Tensor r = Tensor::randn({1, 3, 7, 6}, rng, 1.0);
    const std::function<Var()> loss = [&] {
      return oracle::project(deform::deformable_conv(w, x, {deform::OffsetKind::local, off}, {m}), r);
    };
    for (Var* p : {&w, &x, &off, &m}) track(oracle::check_gradient(loss, *p, oracle::all_indices(p->value())));
  }

  const ShortcutBlock s(ShortcutConfig::for_channels(8), 1004);
  fixture::perturb_heads(s, rng);
  Var f_ref = parameter(Tensor::randn({1, 8, 12, 12}, rng, 1.0));
  Var a_ref = parameter(Tensor::randn({1, 8, 12, 12}, rng, 1.0));
  Var a_t = parameter(Tensor::randn({1, 8, 12, 12}, rng, 1.0));
  const Tensor r = Tensor::randn({1, 8, 12, 12}, rng, 1.0);
  const std::function<Var()> loss = [&] { return oracle::project(s.forward(f_ref, a_ref, a_t).features, r); };
  for (Var* p : {&f_ref, &a_ref, &a_t}) track(oracle::check_gradient(loss, *p, oracle::sample_indices(p->value(), 80, rng), 1e-5));
  for (const auto& p : s.parameters())
    track(oracle::check_gradient(loss, p.var, oracle::sample_indices(p.var.value(), 80, rng), 1e-5));
  return {worst < 1e-3, fmt("%d partials, max relative error %.3g (tol 1e-3)", checked, worst)};
}

Outcome schedule_semantics() {
  std::mt19937_64 rng(1005);
  const TeacherGenerator teacher(8, 1005);
  const auto split = TeacherSplit::for_level(Dependence::medium);
  const ShortcutBlock s(ShortcutConfig::for_channels(teacher.layer_out_channels(split.encoder_layer)), 1006);
  fixture::perturb_heads(s, rng, 0.1);
  data::SyntheticVideoSpec spec;
  spec.num_frames = 7;
  spec.height = 32;
  spec.width = 48;
  const auto frames = data::generate_video(spec).source.frames;

  const auto teacher_only = run_teacher_only(frames, teacher);
  const auto a1 = run_video(frames, teacher, s, split, {1});
  bool bitwise = true;
  for (int t = 0; t < 7; ++t) bitwise = bitwise && a1.outputs[t].storage() == teacher_only[t].storage();

  const auto a3 = run_video(frames, teacher, s, split, {3});
  std::string trace;
  for (auto p : a3.trace) trace += (trace.empty() ? "" : "/") + to_string(p);
  const bool trace_ok = trace == "full/shortcut/shortcut/full/shortcut/shortcut/full";

  StreamingInference stream(teacher, s, split, {3});
  bool streaming = true;
  for (int t = 0; t < 7; ++t) streaming = streaming && stream.step(frames[t], t).storage() == a3.outputs[t].storage();
  return {bitwise && trace_ok && streaming,
          fmt("alpha=1 bitwise=%s; alpha=3 trace %s; streaming==batch %s", bitwise ? "yes" : "no", trace.c_str(),
              streaming ? "yes" : "no")};
}

Outcome init_contract() {
  std::mt19937_64 rng(1007);
  bool ok = true;
  for (int c : {16, 32, 64}) {
    const ShortcutBlock s(ShortcutConfig::for_channels(c), 1007 + c);
    const auto out = s.forward(constant(Tensor::randn({1, c, 32, 64}, rng, 1.0)),
                               constant(Tensor::randn({1, c, 32, 64}, rng, 1.0)),
                               constant(Tensor::randn({1, c, 32, 64}, rng, 1.0)));
    for (double v : out.global_offsets.value().values()) ok = ok && v == 0.0;
    for (double v : out.local_offsets.value().values()) ok = ok && v == 0.0;
    for (double v : out.blend_mask.value().values()) ok = ok && v == 0.5;
  }
  return {ok, ok ? "global offsets == 0, local offsets == 0, mask == 0.5 exactly (C = 16, 32, 64)"
                 : "fresh block deviates from the identity contract"};
}

Outcome compute_savings() {
  const TeacherGenerator teacher(32, 1);
  const auto split = TeacherSplit::for_level(Dependence::medium);
  const ShortcutBlock s(ShortcutConfig::for_channels(teacher.layer_out_channels(split.encoder_layer)), 1);
  const auto r = analysis::cost_report(teacher, s, split, {1, 3, 64, 128});
  bool monotone = true;
  std::string ratios;
  double prev = 0;
  for (int a : {1, 2, 3, 6}) {
    const double v = r.savings_ratio(a);
    monotone = monotone && v > prev;
    prev = v;
    ratios += fmt("%s%d:%.3f", ratios.empty() ? "" : " ", a, v);
  }
  const bool cheaper = r.macs_shortcut_block < r.macs_replaced_segment;
  const bool ok = r.savings_ratio(3) >= 2.0 && cheaper && monotone;
  return {ok, fmt("ratio(3) = %.3f (>= 2); block %llu < segment %llu MACs; ratios {%s}", r.savings_ratio(3),
                  static_cast<unsigned long long>(r.macs_shortcut_block),
                  static_cast<unsigned long long>(r.macs_replaced_segment), ratios.c_str())};
}

Outcome visualization_contracts() {
  bool ok = true;
  std::string why;
  auto require = [&](bool c, const char* what) {
    if (!c && why.empty()) why = what;
    ok = ok && c;
  };
  // Offsets from a fresh block are zero, so sampling lands on the kernel grid.
  const int H = 64, W = 128, fh = 32, fw = 64;
  const ShortcutBlock s(ShortcutConfig::for_channels(16), 5);
  std::mt19937_64 rng(1010);
  const auto out = s.forward(constant(Tensor::randn({1, 16, fh, fw}, rng, 1.0)),
                             constant(Tensor::randn({1, 16, fh, fw}, rng, 1.0)),
                             constant(Tensor::randn({1, 16, fh, fw}, rng, 1.0)));
  for (auto variant : {analysis::OverlayVariant::global, analysis::OverlayVariant::global_local}) {
    const auto g = analysis::overlay_geometry(H, W, out.global_offsets.value(), out.local_offsets.value(), fh, fw, 3,
                                              4, variant);
    require(g.scale == static_cast<double>(H) / fh, "scale is not the frame/feature ratio");
    for (std::size_t o = 0; o < g.outputs.size(); ++o)
      for (int k = 0; k < 9; ++k) {
        const auto p = g.sampled[o * 9 + k];
        require(p.y == g.outputs[o].y + (k / 3 - 1) * g.scale && p.x == g.outputs[o].x + (k % 3 - 1) * g.scale,
                "zero offsets leave the regular grid");
      }
  }
  // A constant row offset moves every sampling point by offset * scale.
  Tensor lo({1, 18, fh, fw});
  for (int k = 0; k < 9; ++k)
    for (int p = 0; p < fh * fw; ++p) lo[(2 * k) * fh * fw + p] = 0.75;
  const auto base = analysis::overlay_geometry(H, W, out.global_offsets.value(), out.local_offsets.value(), fh, fw,
                                               3, 8, analysis::OverlayVariant::global_local);
  const auto moved = analysis::overlay_geometry(H, W, out.global_offsets.value(), lo, fh, fw, 3, 8,
                                                analysis::OverlayVariant::global_local);
  for (std::size_t i = 0; i < base.sampled.size(); ++i)
    require(std::abs(moved.sampled[i].y - base.sampled[i].y - 0.75 * 2.0) < 1e-12, "constant offset misplaced");
  for (double v : {0.0, 0.5, 1.0}) {
    const auto img = analysis::mask_heatmap(Tensor({1, 9, fh, fw}, v));
    const std::set<int> levels(img.pixels.begin(), img.pixels.end());
    require(levels.size() == 1, "uniform mask gives a non-uniform heatmap");
  }
  const auto mid = analysis::mask_heatmap(out.blend_mask.value());
  require(std::set<int>(mid.pixels.begin(), mid.pixels.end()) == std::set<int>{128}, "fresh mask is not mid-grey");
  return {ok, ok ? fmt("grid sampling at zero offsets, uniform heatmaps, scale %.1f = %d/%d", base.scale, H, fh)
                 : why};
}

// ---------------------------------------------------------------------------
// Toy setup shared by the learning criteria.

struct ToySetup {
  std::vector<std::vector<Tensor>> train_src, train_tgt, held_src;
  TeacherGenerator teacher{32, 2001};
  TeacherSplit split = TeacherSplit::for_level(Dependence::medium);
  FeatureBank train_bank, held_bank;
  double teacher_seconds = 0;
};

constexpr int kAlpha = 3;
constexpr double kMotion = 1.0;
constexpr double kShortcutLr = 1e-3;

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

ToySetup& toy() {
  static ToySetup* setup = [] {
    auto* s = new ToySetup;
    data::SyntheticVideoSpec spec;
    spec.motion_px_per_frame = kMotion;
    spec.seed = 3001;
    for (auto& v : data::generate_dataset(spec, 8)) {
      s->train_src.push_back(v.source.frames);
      s->train_tgt.push_back(v.target.frames);
    }
    spec.seed = 4001;
    for (auto& v : data::generate_dataset(spec, 2)) s->held_src.push_back(v.source.frames);
    const auto t0 = std::chrono::steady_clock::now();
    TeacherTrainConfig tc;
    tc.steps = 300;
    tc.seed = 2002;
    train_teacher(s->train_src, s->train_tgt, s->teacher, tc);
    s->teacher_seconds = seconds_since(t0);
    s->train_bank = FeatureBank::build(s->train_src, s->teacher, s->split);
    s->held_bank = FeatureBank::build(s->held_src, s->teacher, s->split);
    return s;
  }();
  return *setup;
}

ShortcutConfig toy_shortcut_config(const ToySetup& t) {
  return ShortcutConfig::for_channels(t.teacher.layer_out_channels(t.split.encoder_layer));
}

ShortcutTrainConfig toy_recipe(int steps) {
  ShortcutTrainConfig cfg;
  cfg.steps = steps;
  cfg.alpha = kAlpha;
  cfg.lr_shortcut = kShortcutLr;
  cfg.seed = 5001;
  return cfg;
}

Outcome redundancy_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const ToySetup& t = toy();
  bool ok = true;
  std::string detail;
  for (double motion : {1.0, 2.0}) {
    data::SyntheticVideoSpec spec;
    spec.motion_px_per_frame = motion;
    spec.seed = 6001;
    std::vector<std::vector<Tensor>> videos;
    for (auto& v : data::generate_dataset(spec, 4)) videos.push_back(v.source.frames);
    const auto report = analysis::teacher_redundancy(videos, t.teacher, 40, 6002);
    double min_adj = 1, max_rand = -1;
    for (const auto& l : report.layers) {
      min_adj = std::min(min_adj, l.adjacent.cc);
      max_rand = std::max(max_rand, l.random.cc);
    }
    ok = ok && report.mean_margin() >= 0.2;
    detail += fmt("%smotion %.0f: margin %.3f (adjacent cc >= %.3f, random cc <= %.3f)", detail.empty() ? "" : "; ",
                  motion, report.mean_margin(), min_adj, max_rand);
  }
  return {ok, detail + fmt("; %.0fs excluding teacher training", seconds_since(t0) - t.teacher_seconds)};
}

Outcome learning_efficacy() {
  ToySetup& t = toy();
  const auto cfg = toy_recipe(2000);
  ShortcutBlock sc(toy_shortcut_config(t), 7001);
  const ShortcutBlock initial(toy_shortcut_config(t), 7001);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainLog log = train_shortcut(t.train_bank, t.teacher, sc, t.split, cfg);
  const double train_s = seconds_since(t0);
  fs::create_directories("acceptance_artifacts");
  log.write_csv("acceptance_artifacts/shortcut_log.csv");

  const auto trained = evaluate_feature_errors(t.held_bank, sc, kAlpha);
  const auto init = evaluate_feature_errors(t.held_bank, initial, kAlpha);
  const int w = 100, n = cfg.steps;
  const double align0 = log.window_mean(&StepRecord::align, 0, w), align1 = log.window_mean(&StepRecord::align, n - w, n);
  const double feat0 = log.window_mean(&StepRecord::feat, 0, w), feat1 = log.window_mean(&StepRecord::feat, n - w, n);
  const bool a = trained.shortcut_l1 < 0.7 * init.shortcut_l1;
  const bool b = trained.shortcut_l1 < trained.copy_l1;
  const bool curves = align1 < align0 && feat1 < feat0;
  return {a && b && curves,
          fmt("held-out L1 %.4f vs init %.4f (ratio %.3f, need < 0.7: %s) vs copy %.4f (need below: %s); "
              "align %.4f->%.4f, feat %.4f->%.4f (%s); %d pairs, %.0fs",
              trained.shortcut_l1, init.shortcut_l1, trained.shortcut_l1 / init.shortcut_l1, a ? "ok" : "no",
              trained.copy_l1, b ? "ok" : "no", align0, align1, feat0, feat1, curves ? "decreasing" : "not decreasing",
              trained.pairs, train_s)};
}

Outcome ablation_direction() {
  ToySetup& t = toy();
  const auto cfg = toy_recipe(1000);
  double full = 0;
  std::string detail;
  bool ok = true;
  for (auto mode : {BlendMode::adaptive, BlendMode::fixed_half, BlendMode::reference_only, BlendMode::current_only}) {
    ShortcutConfig sc_cfg = toy_shortcut_config(t);
    sc_cfg.blend = mode;
    ShortcutBlock sc(sc_cfg, 7001);
    train_shortcut(t.train_bank, t.teacher, sc, t.split, cfg);
    const double l1 = evaluate_feature_errors(t.held_bank, sc, kAlpha).shortcut_l1;
    if (mode == BlendMode::adaptive)
      full = l1;
    else
      ok = ok && full <= l1;
    detail += fmt("%s%s %.4f", detail.empty() ? "" : ", ", to_string(mode).c_str(), l1);
  }
  return {ok, fmt("%d steps each: ", cfg.steps) + detail};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "operator reduction", operator_reduction},
      {2, "fused blend-and-deform equivalence", fused_equivalence},
      {3, "gradient correctness", gradient_correctness},
      {4, "inference schedule semantics", schedule_semantics},
      {5, "initialization contract", init_contract},
      {6, "compute savings", compute_savings},
      {7, "redundancy ordering", redundancy_ordering},
      {8, "learning efficacy", learning_efficacy},
      {9, "ablation direction", ablation_direction},
      {10, "visualization contracts", visualization_contracts},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << fmt(" (%.1fs)", seconds_since(t0)) << std::endl;
  }
  std::cout << (failed ? fmt("%d criteria failed", failed) : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
