// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "sv2v/analysis.hpp"
#include "sv2v/checkpoint.hpp"
#include "sv2v/dataio.hpp"
#include "sv2v/scheduler.hpp"
#include "sv2v/training.hpp"

namespace sv2v::cli {
namespace fs = std::filesystem;

namespace {

// Input problems discovered after parsing (bad config values, missing
// required inputs) that should still count as usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ConfigKey int_key(std::string name, long long def, double lo, double hi, std::string help) {
  return {std::move(name), ValueType::integer, std::to_string(def), std::move(help), {}, lo, hi};
}
ConfigKey real_key(std::string name, std::string def, double lo, double hi, std::string help) {
  return {std::move(name), ValueType::real, std::move(def), std::move(help), {}, lo, hi};
}
ConfigKey choice_key(std::string name, std::string def, std::vector<std::string> choices, std::string help) {
  return {std::move(name), ValueType::text, std::move(def), std::move(help), std::move(choices)};
}

}  // namespace

std::vector<ConfigKey> config_schema() {
  return {
      int_key("seed", 0, 0, 1e15, "base seed; every random stream derives from it"),
      int_key("alpha", 3, 1, 10000, "max interval between full teacher passes"),
      choice_key("dependence", "medium", {"low", "medium", "high"}, "teacher segment the shortcut replaces"),
      choice_key("channel_variant", "full", {"full", "half", "quarter"}, "reduced channel count C/2, C/4, C/8"),
      choice_key("keyframe_variant", "teacher", {"teacher", "shortcut"}, "output emitted at keyframes"),
      choice_key("blend_mode", "adaptive", {"adaptive", "fixed_half", "reference_only", "current_only"},
                 "blend mask source (non-adaptive modes are ablations)"),
      int_key("base_width", 32, 4, 256, "teacher base channel width"),
      int_key("height", 64, 4, 4096, "frame height"),
      int_key("width", 128, 4, 4096, "frame width"),
      int_key("num_videos", 8, 1, 10000, "training videos"),
      int_key("heldout_videos", 2, 1, 10000, "held-out videos"),
      int_key("num_frames", 12, 2, 100000, "frames per video"),
      real_key("motion", "1.0", 0, 64, "pan speed in pixels per frame"),
      int_key("num_shapes", 4, 0, 64, "moving shapes per video"),
      choice_key("task", "color_invert", {"color_invert", "edge_to_fill"}, "translation task"),
      choice_key("frame_format", "png", {"png", "raw"}, "stored frame format"),
      int_key("teacher_steps", 400, 0, 1e9, "teacher training steps"),
      real_key("teacher_lr", "5e-4", 1e-12, 1, "teacher learning rate"),
      real_key("teacher_gan_weight", "0.05", 0, 1e6, "teacher adversarial weight"),
      int_key("shortcut_steps", 2000, 0, 1e9, "shortcut training steps"),
      real_key("lr_shortcut", "2e-4", 1e-12, 1, "shortcut learning rate"),
      real_key("lr_disc", "2e-5", 1e-12, 1, "discriminator learning rate"),
      real_key("lambda_align", "5", 0, 1e6, "alignment loss weight"),
      real_key("lambda_feat", "5", 0, 1e6, "feature distillation weight"),
      real_key("lambda_out", "10", 0, 1e6, "output distillation weight"),
      real_key("lambda_perc", "10", 0, 1e6, "perceptual loss weight"),
      real_key("lambda_gan", "1", 0, 1e6, "frame adversarial weight"),
      real_key("lambda_tgan", "1", 0, 1e6, "temporal adversarial weight"),
      choice_key("gan_mode", "logistic", {"logistic", "least_squares"}, "adversarial loss form"),
      {"perceptual", ValueType::boolean, "true", "use the perceptual term", {}},
      int_key("random_pairs", 40, 2, 1e7, "random frame pairs for redundancy statistics"),
      int_key("overlay_stride", 4, 1, 4096, "output-point subsampling in offset overlays"),
      int_key("overlay_magnify", 4, 1, 64, "overlay enlargement factor"),
  };
}

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<long long> seed;
  std::optional<int> alpha;
  std::string dependence, channel_variant, keyframe_variant;
  std::vector<std::string> overrides;
  // subcommand inputs
  std::string data_dir, teacher_path, shortcut_path, input_dir;
  bool teacher_only = false;
  int frame = 1;
  int reference = 0;
};

Config resolve_config(const Options& o) {
  Config cfg(config_schema());
  try {
    if (!o.config_path.empty()) cfg.load_file(o.config_path);
    for (const auto& s : o.overrides) cfg.apply_override(s);
    if (o.seed) cfg.set("seed", std::to_string(*o.seed));
    if (o.alpha) cfg.set("alpha", std::to_string(*o.alpha));
    if (!o.dependence.empty()) cfg.set("dependence", o.dependence);
    if (!o.channel_variant.empty()) cfg.set("channel_variant", o.channel_variant);
    if (!o.keyframe_variant.empty()) cfg.set("keyframe_variant", o.keyframe_variant);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::uint64_t seed_of(const Config& c, std::uint64_t stream) {
  return static_cast<std::uint64_t>(c.get_int("seed")) * 1000003ULL + stream;
}

fs::path out_path(const Options& o, const std::string& name) { return fs::path(o.out_dir) / name; }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  os << text;
  if (!os) throw IoError("cannot write '" + p.string() + "'");
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

void prepare_out(const Options& o, const Config& cfg, const std::string& sub) {
  fs::create_directories(o.out_dir);
  write_text(out_path(o, sub + ".config"), cfg.serialize());
}

TeacherSplit split_of(const Config& c) { return TeacherSplit::for_level(dependence_from_string(c.get_string("dependence"))); }

data::SyntheticVideoSpec video_spec(const Config& c) {
  data::SyntheticVideoSpec s;
  s.num_frames = static_cast<int>(c.get_int("num_frames"));
  s.height = static_cast<int>(c.get_int("height"));
  s.width = static_cast<int>(c.get_int("width"));
  s.motion_px_per_frame = c.get_double("motion");
  s.num_shapes = static_cast<int>(c.get_int("num_shapes"));
  s.task = data::task_from_string(c.get_string("task"));
  return s;
}

std::string video_dir_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "video_%03d", i);
  return buf;
}

// Every saved video under root whose manifest role matches, in path order.
std::vector<fs::path> find_videos(const fs::path& root, const std::string& role) {
  if (!fs::is_directory(root)) throw UsageError("input directory '" + root.string() + "' does not exist");
  std::vector<fs::path> dirs;
  auto consider = [&](const fs::path& dir) {
    const fs::path m = dir / "manifest.json";
    if (!fs::exists(m)) return;
    std::ifstream is(m);
    const auto j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw IoError("corrupt manifest '" + m.string() + "'");
    if (j.value("role", std::string()) == role) dirs.push_back(dir);
  };
  consider(root);
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_directory()) consider(e.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

std::vector<std::vector<Tensor>> load_frames(const std::vector<fs::path>& dirs) {
  std::vector<std::vector<Tensor>> v;
  for (const auto& d : dirs) v.push_back(data::load_video(d.string()).frames);
  return v;
}

TeacherGenerator load_or_init_teacher(const Options& o, const Config& c, std::ostream& out) {
  if (!o.teacher_path.empty()) return TeacherGenerator::from_checkpoint(load_checkpoint(o.teacher_path));
  out << "no --teacher given; using a freshly initialised teacher\n";
  return TeacherGenerator(static_cast<int>(c.get_int("base_width")), seed_of(c, 1));
}

ShortcutConfig shortcut_config(const Config& c, const TeacherGenerator& t, const TeacherSplit& split) {
  ShortcutConfig sc = ShortcutConfig::for_channels(
      t.layer_out_channels(split.encoder_layer), channel_variant_from_string(c.get_string("channel_variant")));
  sc.blend = blend_mode_from_string(c.get_string("blend_mode"));
  return sc;
}

ShortcutBlock load_or_init_shortcut(const Options& o, const Config& c, const TeacherGenerator& t,
                                    const TeacherSplit& split, std::ostream& out) {
  if (o.shortcut_path.empty()) {
    out << "no --shortcut given; using a freshly initialised shortcut block\n";
    return ShortcutBlock(shortcut_config(c, t, split), seed_of(c, 2));
  }
  const Checkpoint ck = load_checkpoint(o.shortcut_path);
  if (auto it = ck.config.find("dependence"); it != ck.config.end() && it->second != c.get_string("dependence"))
    throw std::runtime_error("shortcut checkpoint was trained for dependence '" + it->second +
                             "', config selects '" + c.get_string("dependence") + "'");
  ShortcutBlock s = ShortcutBlock::from_checkpoint(ck);
  if (s.config().channels != t.layer_out_channels(split.encoder_layer))
    throw std::runtime_error("shortcut checkpoint expects " + std::to_string(s.config().channels) +
                             " channels at the split, teacher has " +
                             std::to_string(t.layer_out_channels(split.encoder_layer)));
  return s;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const Options& o, const Config& c, std::ostream& out) {
  prepare_out(o, c, "gen-data");
  const auto format = data::frame_format_from_string(c.get_string("frame_format"));
  data::SyntheticVideoSpec spec = video_spec(c);
  spec.validate();
  struct Part {
    const char* name;
    int count;
    std::uint64_t stream;
  };
  for (const Part& part : {Part{"train", static_cast<int>(c.get_int("num_videos")), 100},
                           Part{"heldout", static_cast<int>(c.get_int("heldout_videos")), 900000}}) {
    spec.seed = seed_of(c, part.stream);
    const auto videos = data::generate_dataset(spec, part.count);
    for (int i = 0; i < part.count; ++i) {
      const fs::path dir = out_path(o, "data") / part.name / video_dir_name(i);
      data::save_video(videos[i].source, (dir / "source").string(), format);
      data::save_video(videos[i].target, (dir / "target").string(), format);
    }
    out << "wrote " << part.count << ' ' << part.name << " videos\n";
  }
  return kSuccess;
}

// Pairs of (source, target) frame sequences below root/<part>.
void load_pairs(const fs::path& root, std::vector<std::vector<Tensor>>& sources,
                std::vector<std::vector<Tensor>>& targets) {
  for (const auto& dir : find_videos(root, "source")) {
    const fs::path tgt = dir.parent_path() / "target";
    if (!fs::exists(tgt / "manifest.json")) throw IoError("source video '" + dir.string() + "' has no sibling target");
    sources.push_back(data::load_video(dir.string()).frames);
    targets.push_back(data::load_video(tgt.string()).frames);
  }
  if (sources.empty()) throw UsageError("no videos found under '" + root.string() + "'");
}

int cmd_train_teacher(const Options& o, const Config& c, std::ostream& out) {
  if (o.data_dir.empty()) throw UsageError("train-teacher needs --data");
  std::vector<std::vector<Tensor>> src, tgt;
  load_pairs(fs::path(o.data_dir) / "train", src, tgt);
  prepare_out(o, c, "train-teacher");
  TeacherGenerator teacher(static_cast<int>(c.get_int("base_width")), seed_of(c, 1));
  TeacherTrainConfig tc;
  tc.steps = static_cast<int>(c.get_int("teacher_steps"));
  tc.lr = c.get_double("teacher_lr");
  tc.gan_weight = c.get_double("teacher_gan_weight");
  tc.seed = seed_of(c, 3);
  const auto log = train_teacher(src, tgt, teacher, tc);
  write_teacher_log_csv(out_path(o, "teacher_log.csv").string(), log);
  save_checkpoint(out_path(o, "teacher.ckpt").string(), teacher.to_checkpoint());
  out << "trained teacher for " << tc.steps << " steps";
  if (!log.empty()) out << ", final L1 " << log.back().l1;
  out << '\n';
  return kSuccess;
}

int cmd_train_shortcut(const Options& o, const Config& c, std::ostream& out) {
  if (o.data_dir.empty()) throw UsageError("train-shortcut needs --data");
  if (o.teacher_path.empty()) throw UsageError("train-shortcut needs --teacher");
  const TeacherGenerator teacher = TeacherGenerator::from_checkpoint(load_checkpoint(o.teacher_path));
  const TeacherSplit split = split_of(c);
  const auto train = load_frames(find_videos(fs::path(o.data_dir) / "train", "source"));
  if (train.empty()) throw UsageError("no training videos under '" + o.data_dir + "/train'");
  const auto heldout_dirs = find_videos(fs::path(o.data_dir) / "heldout", "source");
  prepare_out(o, c, "train-shortcut");

  ShortcutBlock shortcut(shortcut_config(c, teacher, split), seed_of(c, 2));
  // Parameters are shared handles, so the untrained baseline is rebuilt from the same seed.
  const ShortcutBlock initial(shortcut_config(c, teacher, split), seed_of(c, 2));
  ShortcutTrainConfig tc;
  tc.steps = static_cast<int>(c.get_int("shortcut_steps"));
  tc.alpha = static_cast<int>(c.get_int("alpha"));
  tc.lr_shortcut = c.get_double("lr_shortcut");
  tc.lr_disc = c.get_double("lr_disc");
  tc.weights = {c.get_double("lambda_align"), c.get_double("lambda_feat"), c.get_double("lambda_out"),
                c.get_double("lambda_perc"),  c.get_double("lambda_gan"),  c.get_double("lambda_tgan")};
  tc.gan_mode = gan_mode_from_string(c.get_string("gan_mode"));
  tc.use_perceptual = c.get_bool("perceptual");
  tc.seed = seed_of(c, 4);
  const FeatureBank bank = FeatureBank::build(train, teacher, split);
  const TrainLog log = train_shortcut(bank, teacher, shortcut, split, tc);
  log.write_csv(out_path(o, "shortcut_log.csv").string());
  Checkpoint ck = shortcut.to_checkpoint();
  ck.config["dependence"] = c.get_string("dependence");
  ck.config["channel_variant"] = c.get_string("channel_variant");
  save_checkpoint(out_path(o, "shortcut.ckpt").string(), ck);

  nlohmann::json report{{"steps", tc.steps}, {"alpha", tc.alpha}};
  if (!heldout_dirs.empty() && tc.alpha >= 2) {
    const FeatureBank held = FeatureBank::build(load_frames(heldout_dirs), teacher, split);
    const FeatureErrors trained = evaluate_feature_errors(held, shortcut, tc.alpha);
    const FeatureErrors init = evaluate_feature_errors(held, initial, tc.alpha);
    report["heldout"] = {{"pairs", trained.pairs},
                         {"shortcut_l1", trained.shortcut_l1},
                         {"initial_shortcut_l1", init.shortcut_l1},
                         {"copy_reference_l1", trained.copy_l1}};
    out << "held-out L1: shortcut " << trained.shortcut_l1 << ", copy-reference " << trained.copy_l1
        << ", initial " << init.shortcut_l1 << '\n';
  }
  write_json(out_path(o, "shortcut_eval.json"), report);
  return kSuccess;
}

int cmd_infer(const Options& o, const Config& c, std::ostream& out) {
  if (o.input_dir.empty()) throw UsageError("infer needs --input (a saved source video)");
  const data::VideoRecord input = data::load_video(o.input_dir);
  const TeacherGenerator teacher = load_or_init_teacher(o, c, out);
  const TeacherSplit split = split_of(c);
  const auto format = data::frame_format_from_string(c.get_string("frame_format"));
  prepare_out(o, c, "infer");

  data::VideoRecord result;
  result.manifest = {{"role", "output"}};
  if (o.teacher_only) {
    result.frames = run_teacher_only(input.frames, teacher);
    result.manifest["mode"] = "teacher_only";
  } else {
    const ShortcutBlock shortcut = load_or_init_shortcut(o, c, teacher, split, out);
    ScheduleConfig sc;
    sc.alpha = static_cast<int>(c.get_int("alpha"));
    sc.variant = keyframe_variant_from_string(c.get_string("keyframe_variant"));
    const PathCosts costs = PathCosts::measure(teacher, shortcut, split, input.frames.front().shape());
    VideoRun run = run_video(input.frames, teacher, shortcut, split, sc, costs);
    write_json(out_path(o, "trace.json"), trace_to_json(run, costs, sc));
    result.frames = std::move(run.outputs);
    result.manifest["mode"] = "scheduled";
  }
  data::save_video(result, out_path(o, "frames").string(), format);
  out << "wrote " << result.frames.size() << " frames\n";
  return kSuccess;
}

int cmd_analyze(const Options& o, const Config& c, std::ostream& out) {
  if (o.input_dir.empty()) throw UsageError("analyze needs --input (a video or dataset directory)");
  const auto videos = load_frames(find_videos(o.input_dir, "source"));
  if (videos.empty()) throw UsageError("no source videos under '" + o.input_dir + "'");
  const TeacherGenerator teacher = load_or_init_teacher(o, c, out);
  prepare_out(o, c, "analyze");
  const auto report =
      analysis::teacher_redundancy(videos, teacher, static_cast<int>(c.get_int("random_pairs")), seed_of(c, 5));
  write_json(out_path(o, "redundancy.json"), report.to_json());
  out << "mean adjacent-minus-random correlation margin " << report.mean_margin() << '\n';
  return kSuccess;
}

int cmd_benchmark(const Options& o, const Config& c, std::ostream& out) {
  prepare_out(o, c, "benchmark");
  const int alpha = static_cast<int>(c.get_int("alpha"));
  std::vector<int> alphas{1, 2, 3, 6};
  if (std::find(alphas.begin(), alphas.end(), alpha) == alphas.end()) alphas.push_back(alpha);
  std::sort(alphas.begin(), alphas.end());
  const Shape frame{1, 3, static_cast<int>(c.get_int("height")), static_cast<int>(c.get_int("width"))};
  const TeacherGenerator teacher(static_cast<int>(c.get_int("base_width")), seed_of(c, 1));

  auto report_for = [&](const std::string& dep, const std::string& variant) {
    Config local = c;
    local.set("dependence", dep);
    local.set("channel_variant", variant);
    const TeacherSplit split = split_of(local);
    const ShortcutBlock shortcut(shortcut_config(local, teacher, split), seed_of(c, 2));
    nlohmann::json j = analysis::cost_report(teacher, shortcut, split, frame).to_json(alphas);
    j["dependence"] = dep;
    j["channel_variant"] = variant;
    return j;
  };
  nlohmann::json j;
  j["frame_shape"] = frame;
  j["alpha"] = alpha;
  j["selected"] = report_for(c.get_string("dependence"), c.get_string("channel_variant"));
  j["configurations"] = nlohmann::json::array();
  for (const char* dep : {"low", "medium", "high"})
    for (const char* variant : {"full", "half", "quarter"}) j["configurations"].push_back(report_for(dep, variant));
  write_json(out_path(o, "cost_report.json"), j);
  for (const auto& row : j["selected"]["per_alpha"])
    if (row["alpha"] == alpha) out << "savings_ratio(alpha=" << alpha << ") = " << row["savings_ratio"].get<double>() << '\n';
  return kSuccess;
}

int cmd_visualize(const Options& o, const Config& c, std::ostream& out) {
  if (o.input_dir.empty()) throw UsageError("visualize needs --input (a saved source video)");
  const data::VideoRecord input = data::load_video(o.input_dir);
  const int n = static_cast<int>(input.frames.size());
  if (o.reference < 0 || o.reference >= n || o.frame < 0 || o.frame >= n)
    throw UsageError("--reference/--frame must index the " + std::to_string(n) + " input frames");
  const TeacherGenerator teacher = load_or_init_teacher(o, c, out);
  const TeacherSplit split = split_of(c);
  const ShortcutBlock shortcut = load_or_init_shortcut(o, c, teacher, split, out);
  prepare_out(o, c, "visualize");

  auto features = [&](int t, Var& a, Var& f) {
    a = teacher.encode_to(constant(input.frames[t]), split.encoder_layer);
    f = teacher.middle_to(a, split.encoder_layer, split.decoder_layer);
  };
  Var a_ref, f_ref, a_t, f_t;
  features(o.reference, a_ref, f_ref);
  features(o.frame, a_t, f_t);
  const ShortcutOutput s = shortcut.forward(f_ref, a_ref, a_t);
  const int k = shortcut.config().kernel_size;
  const int stride = static_cast<int>(c.get_int("overlay_stride"));
  const int mag = static_cast<int>(c.get_int("overlay_magnify"));
  const Tensor& frame = input.frames[o.frame];
  const Tensor& g = s.global_offsets.value();
  const Tensor& l = s.local_offsets.value();
  analysis::export_offset_overlay(out_path(o, "overlay_global.png").string(), frame, g, l, k, stride,
                                  analysis::OverlayVariant::global, mag);
  analysis::export_offset_overlay(out_path(o, "overlay_global_local.png").string(), frame, g, l, k, stride,
                                  analysis::OverlayVariant::global_local, mag);
  analysis::export_mask_heatmap(out_path(o, "mask.png").string(), s.blend_mask.value());
  out << "wrote overlays and mask heatmap for frame " << o.frame << " (reference " << o.reference << ")\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keyframe-cached video translation with a learned shortcut block", "shortcut-v2v"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--alpha", o.alpha, "max interval between full passes")->check(CLI::PositiveNumber);
  app.add_option("--dependence", o.dependence, "low|medium|high")->check(CLI::IsMember({"low", "medium", "high"}));
  app.add_option("--channel-variant", o.channel_variant, "full|half|quarter")
      ->check(CLI::IsMember({"full", "half", "quarter"}));
  app.add_option("--keyframe-variant", o.keyframe_variant, "teacher|shortcut")
      ->check(CLI::IsMember({"teacher", "shortcut"}));
  app.add_option("--set", o.overrides, "config override key=value (repeatable)");

  auto* gen = app.add_subcommand("gen-data", "generate synthetic paired videos");
  auto* tt = app.add_subcommand("train-teacher", "train the toy teacher");
  tt->add_option("--data", o.data_dir, "dataset directory from gen-data")->required();
  auto* ts = app.add_subcommand("train-shortcut", "train a shortcut block against a frozen teacher");
  ts->add_option("--data", o.data_dir, "dataset directory from gen-data")->required();
  ts->add_option("--teacher", o.teacher_path, "teacher checkpoint")->required()->check(CLI::ExistingFile);
  auto* inf = app.add_subcommand("infer", "run scheduled inference on a video");
  inf->add_option("--input", o.input_dir, "saved source video directory")->required();
  inf->add_option("--teacher", o.teacher_path, "teacher checkpoint")->check(CLI::ExistingFile);
  inf->add_option("--shortcut", o.shortcut_path, "shortcut checkpoint")->check(CLI::ExistingFile);
  inf->add_flag("--teacher-only", o.teacher_only, "full teacher pass on every frame");
  auto* an = app.add_subcommand("analyze", "temporal redundancy of teacher activations");
  an->add_option("--input", o.input_dir, "video or dataset directory")->required();
  an->add_option("--teacher", o.teacher_path, "teacher checkpoint")->check(CLI::ExistingFile);
  auto* bench = app.add_subcommand("benchmark", "MACs and parameter counts per configuration");
  auto* vis = app.add_subcommand("visualize", "offset overlays and blend-mask heatmap");
  vis->add_option("--input", o.input_dir, "saved source video directory")->required();
  vis->add_option("--teacher", o.teacher_path, "teacher checkpoint")->check(CLI::ExistingFile);
  vis->add_option("--shortcut", o.shortcut_path, "shortcut checkpoint")->check(CLI::ExistingFile);
  vis->add_option("--frame", o.frame, "current frame index")->capture_default_str();
  vis->add_option("--reference", o.reference, "reference frame index")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "shortcut-v2v: usage error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    const Config cfg = resolve_config(o);
    if (gen->parsed()) return cmd_gen_data(o, cfg, out);
    if (tt->parsed()) return cmd_train_teacher(o, cfg, out);
    if (ts->parsed()) return cmd_train_shortcut(o, cfg, out);
    if (inf->parsed()) return cmd_infer(o, cfg, out);
    if (an->parsed()) return cmd_analyze(o, cfg, out);
    if (bench->parsed()) return cmd_benchmark(o, cfg, out);
    if (vis->parsed()) return cmd_visualize(o, cfg, out);
  } catch (const UsageError& e) {
    err << "shortcut-v2v: usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "shortcut-v2v: error: " << e.what() << '\n';
    return kRuntimeError;
  }
  err << "shortcut-v2v: usage error: no subcommand\n";
  return kUsageError;
}

}  // namespace sv2v::cli
