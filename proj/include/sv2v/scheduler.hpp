// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sv2v/shortcut.hpp"
#include "sv2v/teacher.hpp"

namespace sv2v {

enum class KeyframeVariant { teacher_output, shortcut_output };
KeyframeVariant keyframe_variant_from_string(std::string_view s);
std::string to_string(KeyframeVariant v);

struct ScheduleConfig {
  int alpha = 3;
  KeyframeVariant variant = KeyframeVariant::teacher_output;

  void validate() const;
};

enum class FramePath { full, shortcut };
std::string to_string(FramePath p);

/// Features cached at the latest full teacher pass.
struct ReferenceCache {
  Tensor a_ref;
  Tensor f_ref;
  int ref_timestep = -1;
  /// reduce_reference(f_ref, a_ref), filled by the first shortcut step that needs it.
  std::optional<ReducedReference> reduced;

  bool populated() const { return ref_timestep >= 0; }
};

/// Per-path MAC counts used to annotate traces.
struct PathCosts {
  std::uint64_t full_frame = 0;
  std::uint64_t shortcut_frame = 0;
  std::uint64_t shortcut_block = 0;
  std::uint64_t reference_prep = 0;  // once per keyframe interval that uses the shortcut

  static PathCosts measure(const TeacherGenerator& teacher, const ShortcutBlock& shortcut,
                           const TeacherSplit& split, const Shape& frame_shape);
};

struct VideoRun {
  std::vector<Tensor> outputs;
  std::vector<FramePath> trace;
  std::vector<std::uint64_t> macs;
};

/// Online form of the inference schedule: frames must arrive in order.
class StreamingInference {
 public:
  StreamingInference(const TeacherGenerator& teacher, const ShortcutBlock& shortcut,
                     TeacherSplit split, ScheduleConfig cfg);

  /// Processes frame t; t must equal frames_processed(), otherwise StateError.
  Tensor step(const Tensor& frame, int t);

  int frames_processed() const { return next_t_; }
  FramePath last_path() const { return last_path_; }
  /// Whether the last step computed the reduced reference (and paid for it).
  bool last_step_prepared_reference() const { return last_prepared_; }
  const ReferenceCache& cache() const { return cache_; }

 private:
  const TeacherGenerator& teacher_;
  const ShortcutBlock& shortcut_;
  TeacherSplit split_;
  ScheduleConfig cfg_;
  ReferenceCache cache_;
  int next_t_ = 0;
  FramePath last_path_ = FramePath::full;
  bool last_prepared_ = false;

  Tensor shortcut_estimate(const Var& a_t);
};

VideoRun run_video(const std::vector<Tensor>& frames, const TeacherGenerator& teacher,
                   const ShortcutBlock& shortcut, const TeacherSplit& split,
                   const ScheduleConfig& cfg, const std::optional<PathCosts>& costs = std::nullopt);

/// Teacher-only reference: the monolithic forward on every frame.
std::vector<Tensor> run_teacher_only(const std::vector<Tensor>& frames,
                                     const TeacherGenerator& teacher);

/// Per-frame path tag, MACs and cumulative savings ratio (full MACs over spent MACs).
nlohmann::json trace_to_json(const VideoRun& run, const PathCosts& costs, const ScheduleConfig& cfg);

}  // namespace sv2v
