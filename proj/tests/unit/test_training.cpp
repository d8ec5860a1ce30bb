// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sv2v/dataio.hpp"
#include "sv2v/ops.hpp"
#include "sv2v/training.hpp"

using namespace sv2v;

TEST_CASE("frame-pair sampling stays within the interval") {
  std::mt19937_64 rng(61);
  const std::vector<int> lengths{12, 5, 2, 30};
  for (int alpha : {1, 3, 6}) {
    std::vector<int> seen(alpha + 1, 0);
    for (int i = 0; i < 10000; ++i) {
      const auto p = sample_frame_pair(lengths, alpha, rng);
      const int gap = p.current - p.reference;
      REQUIRE(gap >= 1);
      REQUIRE(gap <= alpha);
      REQUIRE(p.reference >= 0);
      REQUIRE(p.current < lengths[p.video]);
      ++seen[gap];
    }
    for (int g = 1; g <= alpha; ++g) CHECK(seen[g] > 0);
  }
  CHECK_THROWS_AS(sample_frame_pair({12, 1}, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_frame_pair({}, 3, rng), std::invalid_argument);
}

TEST_CASE("adam minimises a quadratic") {
  Var x = parameter(Tensor({3}, {2.0, -1.0, 0.5}));
  Adam opt({{"x", x}}, 0.05, 0.9);
  for (int i = 0; i < 400; ++i) {
    opt.zero_grad();
    backward(sum_all(mul(x, x)));
    opt.step();
  }
  CHECK(max_abs(x.value()) < 1e-2);
}

TEST_CASE("short shortcut training run") {
  data::SyntheticVideoSpec spec;
  spec.height = 32;
  spec.width = 48;
  spec.num_frames = 6;
  spec.seed = 7;
  std::vector<std::vector<Tensor>> videos;
  for (auto& v : data::generate_dataset(spec, 3)) videos.push_back(v.source.frames);
  const TeacherGenerator teacher(8, 5);
  const auto split = TeacherSplit::for_level(Dependence::medium);
  const auto bank = FeatureBank::build(videos, teacher, split);
  REQUIRE(bank.lengths() == std::vector<int>{6, 6, 6});
  CHECK(bank.a[0][0].shape() == Shape({1, 16, 16, 24}));
  CHECK(bank.o[0][0].shape() == Shape({1, 3, 32, 48}));

  ShortcutBlock sc(ShortcutConfig::for_channels(16), 3);
  ShortcutTrainConfig cfg;
  cfg.steps = 200;
  cfg.lr_shortcut = 1e-3;
  cfg.disc_width = 8;
  cfg.seed = 11;
  const std::uint32_t before = nn::params_checksum(teacher.parameters());
  const TrainLog log = train_shortcut(bank, teacher, sc, split, cfg);
  REQUIRE(log.steps.size() == 200);
  CHECK(nn::params_checksum(teacher.parameters()) == before);
  CHECK(log.window_mean(&StepRecord::align, 180, 200) < log.window_mean(&StepRecord::align, 0, 20));
  CHECK(log.window_mean(&StepRecord::feat, 180, 200) < log.window_mean(&StepRecord::feat, 0, 20));
  for (const auto& s : log.steps) {
    CHECK(s.gap >= 1);
    CHECK(s.gap <= 3);
    CHECK(s.align >= 0);
    CHECK(s.perc >= 0);
  }

  const auto errors = evaluate_feature_errors(bank, sc, 3);
  CHECK(errors.pairs == 3 * 4);
  CHECK(errors.copy_l1 > 0);
  CHECK_THROWS_AS(evaluate_feature_errors(bank, sc, 1), std::invalid_argument);

  const auto path = std::filesystem::temp_directory_path() / "sv2v_train_log.csv";
  log.write_csv(path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "step,gap,align,feat,out,perc,gan,tgan,total,d_gan,d_tgan");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 200);
  std::filesystem::remove(path);

  ShortcutTrainConfig bad = cfg;
  bad.alpha = 0;
  CHECK_THROWS_AS(train_shortcut(bank, teacher, sc, split, bad), std::invalid_argument);
}

TEST_CASE("training is reproducible from the seed") {
  data::SyntheticVideoSpec spec;
  spec.height = 16;
  spec.width = 16;
  spec.num_frames = 4;
  std::vector<std::vector<Tensor>> videos;
  for (auto& v : data::generate_dataset(spec, 2)) videos.push_back(v.source.frames);
  const TeacherGenerator teacher(4, 5);
  const auto split = TeacherSplit::for_level(Dependence::high);
  const auto bank = FeatureBank::build(videos, teacher, split);
  ShortcutTrainConfig cfg;
  cfg.steps = 5;
  cfg.disc_width = 4;
  ShortcutBlock a(ShortcutConfig::for_channels(16), 1), b(ShortcutConfig::for_channels(16), 1);
  const auto la = train_shortcut(bank, teacher, a, split, cfg);
  const auto lb = train_shortcut(bank, teacher, b, split, cfg);
  for (int i = 0; i < 5; ++i) CHECK(la.steps[i].total == lb.steps[i].total);
  CHECK(nn::params_checksum(a.parameters()) == nn::params_checksum(b.parameters()));
}

TEST_CASE("teacher training lowers the reconstruction error") {
  data::SyntheticVideoSpec spec;
  spec.height = 16;
  spec.width = 24;
  spec.num_frames = 4;
  std::vector<std::vector<Tensor>> src, tgt;
  for (auto& v : data::generate_dataset(spec, 2)) {
    src.push_back(v.source.frames);
    tgt.push_back(v.target.frames);
  }
  TeacherGenerator teacher(4, 2);
  TeacherTrainConfig cfg;
  cfg.steps = 60;
  cfg.disc_width = 4;
  const auto log = train_teacher(src, tgt, teacher, cfg);
  REQUIRE(log.size() == 60);
  double first = 0, last = 0;
  for (int i = 0; i < 10; ++i) {
    first += log[i].l1;
    last += log[50 + i].l1;
  }
  CHECK(last < first);
}
