// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/scheduler.hpp"

namespace sv2v {

KeyframeVariant keyframe_variant_from_string(std::string_view s) {
  if (s == "teacher") return KeyframeVariant::teacher_output;
  if (s == "shortcut") return KeyframeVariant::shortcut_output;
  throw std::invalid_argument("unknown keyframe variant '" + std::string(s) +
                              "' (expected teacher or shortcut)");
}

std::string to_string(KeyframeVariant v) {
  return v == KeyframeVariant::teacher_output ? "teacher" : "shortcut";
}

std::string to_string(FramePath p) { return p == FramePath::full ? "full" : "shortcut"; }

void ScheduleConfig::validate() const {
  SV2V_CHECK(alpha >= 1, "max interval alpha must be >= 1, got " + std::to_string(alpha));
}

PathCosts PathCosts::measure(const TeacherGenerator& teacher, const ShortcutBlock& shortcut,
                             const TeacherSplit& split, const Shape& frame_shape) {
  const int last = TeacherGenerator::kNumLayers - 1;
  PathCosts c;
  c.full_frame = cost::count_macs(teacher.describe(0, last), frame_shape).inclusive;
  const std::uint64_t encoder =
      cost::count_macs(teacher.describe(0, split.encoder_layer), frame_shape).inclusive;
  const std::uint64_t decoder =
      cost::count_macs(teacher.describe(split.decoder_layer, last), frame_shape).inclusive;
  const int feature_div = TeacherGenerator::layer_out_div(split.encoder_layer);
  c.shortcut_block = cost::count_macs(shortcut.describe(feature_div), frame_shape).inclusive;
  c.shortcut_frame = encoder + c.shortcut_block + decoder;
  c.reference_prep = cost::count_macs(shortcut.describe_reference(feature_div), frame_shape).inclusive;
  return c;
}

StreamingInference::StreamingInference(const TeacherGenerator& teacher,
                                       const ShortcutBlock& shortcut, TeacherSplit split,
                                       ScheduleConfig cfg)
    : teacher_(teacher), shortcut_(shortcut), split_(split), cfg_(cfg) {
  cfg_.validate();
}

Tensor StreamingInference::shortcut_estimate(const Var& a_t) {
  if (!cache_.reduced) {
    cache_.reduced = shortcut_.reduce_reference(constant(cache_.f_ref), constant(cache_.a_ref));
    last_prepared_ = true;
  }
  return shortcut_.estimate(*cache_.reduced, a_t.value());
}

Tensor StreamingInference::step(const Tensor& frame, int t) {
  if (t != next_t_)
    throw StateError("out-of-order frame: expected t=" + std::to_string(next_t_) + ", got t=" +
                     std::to_string(t));
  const Var a_t = teacher_.encode_to(constant(frame), split_.encoder_layer);
  Tensor output;
  last_prepared_ = false;
  if (t % cfg_.alpha == 0) {
    const Var f_t = teacher_.middle_to(a_t, split_.encoder_layer, split_.decoder_layer);
    if (cfg_.variant == KeyframeVariant::shortcut_output && cache_.populated()) {
      const Tensor f_hat = shortcut_estimate(a_t);
      output = teacher_.decode_from(constant(f_hat), split_.decoder_layer).value();
    } else {
      output = teacher_.decode_from(f_t, split_.decoder_layer).value();
    }
    cache_.a_ref = a_t.value();
    cache_.f_ref = f_t.value();
    cache_.ref_timestep = t;
    cache_.reduced.reset();
    last_path_ = FramePath::full;
  } else {
    if (!cache_.populated()) throw StateError("shortcut step before any reference was cached");
    const Tensor f_hat = shortcut_estimate(a_t);
    output = teacher_.decode_from(constant(f_hat), split_.decoder_layer).value();
    last_path_ = FramePath::shortcut;
  }
  ++next_t_;
  return output;
}

VideoRun run_video(const std::vector<Tensor>& frames, const TeacherGenerator& teacher,
                   const ShortcutBlock& shortcut, const TeacherSplit& split,
                   const ScheduleConfig& cfg, const std::optional<PathCosts>& costs) {
  SV2V_CHECK(!frames.empty(), "run_video: empty frame sequence");
  StreamingInference session(teacher, shortcut, split, cfg);
  VideoRun run;
  for (int t = 0; t < static_cast<int>(frames.size()); ++t) {
    run.outputs.push_back(session.step(frames[t], t));
    run.trace.push_back(session.last_path());
    if (costs) {
      std::uint64_t m = session.last_path() == FramePath::full ? costs->full_frame
                                                                : costs->shortcut_frame;
      if (session.last_path() == FramePath::full && t > 0 &&
          cfg.variant == KeyframeVariant::shortcut_output)
        m += costs->shortcut_block;
      if (session.last_step_prepared_reference()) m += costs->reference_prep;
      run.macs.push_back(m);
    }
  }
  return run;
}

std::vector<Tensor> run_teacher_only(const std::vector<Tensor>& frames,
                                     const TeacherGenerator& teacher) {
  std::vector<Tensor> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(teacher.forward(f));
  return out;
}

nlohmann::json trace_to_json(const VideoRun& run, const PathCosts& costs,
                             const ScheduleConfig& cfg) {
  nlohmann::json frames = nlohmann::json::array();
  std::uint64_t spent = 0;
  for (std::size_t t = 0; t < run.trace.size(); ++t) {
    const std::uint64_t m = t < run.macs.size() ? run.macs[t] : 0;
    spent += m;
    const double baseline = static_cast<double>(costs.full_frame) * static_cast<double>(t + 1);
    frames.push_back({{"t", t},
                      {"path", to_string(run.trace[t])},
                      {"macs", m},
                      {"cumulative_savings_ratio", spent ? baseline / static_cast<double>(spent) : 0.0}});
  }
  return {{"alpha", cfg.alpha},
          {"keyframe_variant", to_string(cfg.variant)},
          {"full_frame_macs", costs.full_frame},
          {"shortcut_frame_macs", costs.shortcut_frame},
          {"reference_prep_macs", costs.reference_prep},
          {"frames", frames}};
}

}  // namespace sv2v
