#include "elgar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <numbers>
#include <random>
#include <set>

#include "elgar/error.hpp"
#include "elgar/io.hpp"
#include "elgar/synth.hpp"

#ifndef ELGAR_DATA_DIR
#define ELGAR_DATA_DIR "data"
#endif

namespace elgar {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

unsigned long long mix_seed(unsigned long long seed, unsigned long long a, unsigned long long b = 0) {
  // splitmix64 over the combined words
  unsigned long long z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) raise(ErrorCode::ParseError, "unknown config key " + where + k);
  }
}

std::string take_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "take_%03d", i);
  return buf;
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "preset" : out;
}

std::vector<std::string> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (e.is_regular_file() && n.size() > ext.size() && n.compare(n.size() - ext.size(), ext.size(), ext) == 0) {
      out.push_back(n.substr(0, n.size() - ext.size()));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (!(fps > 0)) raise(ErrorCode::InvalidArgument, "fps must be positive");
  if (diffusion_steps_T < 2) raise(ErrorCode::InvalidArgument, "diffusion T must be >= 2");
  if (sample_steps < 1 || sample_steps > diffusion_steps_T) raise(ErrorCode::InvalidArgument, "steps must lie in [1, T]");
  if (!(cond_dropout >= 0 && cond_dropout <= 1)) raise(ErrorCode::InvalidArgument, "cond_dropout must lie in [0, 1]");
  if (!(overlap_s >= 0)) raise(ErrorCode::InvalidArgument, "overlap must be >= 0");
  if (slice_frames < 1 || slice_stride < 1) raise(ErrorCode::InvalidArgument, "slice length and stride must be positive");
  if (std::lround(overlap_s * fps) >= slice_frames) raise(ErrorCode::BadOverlap, "overlap must be shorter than a slice");
  denoiser.validate();
  weights.validate();
  if (train.steps < 0 || train.batch < 1) raise(ErrorCode::InvalidArgument, "bad training settings");
  if (!(train.adam.lr > 0)) raise(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (synth.train_takes < 0 || synth.test_takes < 0 || synth.notes_per_take < 1) {
    raise(ErrorCode::InvalidArgument, "bad synthetic dataset settings");
  }
}

RunConfig default_run_config() {
  RunConfig c;
  c.skeleton_path = std::string(ELGAR_DATA_DIR) + "/skeleton.json";
  c.cello_path = std::string(ELGAR_DATA_DIR) + "/cello.json";
  c.denoiser.max_frames = c.slice_frames;
  return c;
}

RunConfig run_config_from_json(const std::string& text, const std::string& base_dir) {
  RunConfig c = default_run_config();
  try {
    const json j = json::parse(text);
    if (!j.is_object()) raise(ErrorCode::ParseError, "config must be a JSON object");
    check_keys(j, {"skeleton", "cello", "dataset", "output", "seed", "fps", "diffusion", "denoiser", "train",
                   "loss_weights", "synth", "ablation"},
               "");
    if (j.contains("skeleton")) c.skeleton_path = resolve(base_dir, j["skeleton"].get<std::string>());
    if (j.contains("cello")) c.cello_path = resolve(base_dir, j["cello"].get<std::string>());
    c.dataset_dir = resolve(base_dir, j.value("dataset", c.dataset_dir));
    c.output_dir = resolve(base_dir, j.value("output", c.output_dir));
    c.seed = j.value("seed", c.seed);
    c.fps = j.value("fps", c.fps);
    if (j.contains("diffusion")) {
      const json& d = j["diffusion"];
      check_keys(d, {"T", "steps", "guidance_w", "cond_dropout", "overlap_s", "slice_frames", "slice_stride"},
                 "diffusion.");
      c.diffusion_steps_T = d.value("T", c.diffusion_steps_T);
      c.sample_steps = d.value("steps", c.sample_steps);
      c.guidance_w = d.value("guidance_w", c.guidance_w);
      c.cond_dropout = d.value("cond_dropout", c.cond_dropout);
      c.overlap_s = d.value("overlap_s", c.overlap_s);
      c.slice_frames = d.value("slice_frames", c.slice_frames);
      c.slice_stride = d.value("slice_stride", c.slice_stride);
    }
    c.denoiser.max_frames = c.slice_frames;
    if (j.contains("denoiser")) {
      const json& d = j["denoiser"];
      // max_frames follows slice_frames; it is accepted so that echoed configs load back
      check_keys(d, {"blocks", "dim", "heads", "cond_dim", "max_frames", "feature_dim"}, "denoiser.");
      c.denoiser.blocks = d.value("blocks", c.denoiser.blocks);
      c.denoiser.dim = d.value("dim", c.denoiser.dim);
      c.denoiser.heads = d.value("heads", c.denoiser.heads);
      c.denoiser.cond_dim = d.value("cond_dim", c.denoiser.cond_dim);
      c.denoiser.feature_dim = d.value("feature_dim", c.denoiser.feature_dim);
    }
    if (j.contains("train")) {
      const json& t = j["train"];
      check_keys(t, {"steps", "batch", "lr", "beta1", "beta2", "eps", "checkpoint_every", "threads"}, "train.");
      c.train.steps = t.value("steps", c.train.steps);
      c.train.batch = t.value("batch", c.train.batch);
      c.train.adam.lr = t.value("lr", c.train.adam.lr);
      c.train.adam.beta1 = t.value("beta1", c.train.adam.beta1);
      c.train.adam.beta2 = t.value("beta2", c.train.adam.beta2);
      c.train.adam.eps = t.value("eps", c.train.adam.eps);
      c.train.checkpoint_every = t.value("checkpoint_every", c.train.checkpoint_every);
      c.train.threads = t.value("threads", c.train.threads);
    }
    if (j.contains("loss_weights")) {
      const json& w = j["loss_weights"];
      check_keys(w, {"simple", "foot", "pos", "rotvel", "posvel", "hand", "bow"}, "loss_weights.");
      c.weights.simple = w.value("simple", c.weights.simple);
      c.weights.foot = w.value("foot", c.weights.foot);
      c.weights.pos = w.value("pos", c.weights.pos);
      c.weights.rotvel = w.value("rotvel", c.weights.rotvel);
      c.weights.posvel = w.value("posvel", c.weights.posvel);
      c.weights.hand = w.value("hand", c.weights.hand);
      c.weights.bow = w.value("bow", c.weights.bow);
    }
    if (j.contains("synth")) {
      const json& s = j["synth"];
      check_keys(s, {"train_takes", "test_takes", "notes_per_take", "min_note_s", "max_note_s", "capture_jitter_deg",
                     "capture_jitter_m"},
                 "synth.");
      c.synth.train_takes = s.value("train_takes", c.synth.train_takes);
      c.synth.test_takes = s.value("test_takes", c.synth.test_takes);
      c.synth.notes_per_take = s.value("notes_per_take", c.synth.notes_per_take);
      c.synth.min_note_s = s.value("min_note_s", c.synth.min_note_s);
      c.synth.max_note_s = s.value("max_note_s", c.synth.max_note_s);
      c.synth.capture_jitter_deg = s.value("capture_jitter_deg", c.synth.capture_jitter_deg);
      c.synth.capture_jitter_m = s.value("capture_jitter_m", c.synth.capture_jitter_m);
    }
    if (j.contains("ablation")) {
      c.ablation.clear();
      for (const json& p : j["ablation"]) {
        check_keys(p, {"name", "hand", "bow"}, "ablation[].");
        c.ablation.push_back({p.at("name").get<std::string>(), p.value("hand", 0.0), p.value("bow", 0.0)});
      }
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(read_file(path), fs::path(path).parent_path().string());
}

std::string run_config_json(const RunConfig& c) {
  json j;
  j["skeleton"] = c.skeleton_path;
  j["cello"] = c.cello_path;
  j["dataset"] = c.dataset_dir;
  j["output"] = c.output_dir;
  j["seed"] = c.seed;
  j["fps"] = c.fps;
  j["diffusion"] = {{"T", c.diffusion_steps_T},       {"steps", c.sample_steps},
                    {"guidance_w", c.guidance_w},      {"cond_dropout", c.cond_dropout},
                    {"overlap_s", c.overlap_s},        {"slice_frames", c.slice_frames},
                    {"slice_stride", c.slice_stride}};
  j["denoiser"] = {{"blocks", c.denoiser.blocks},
                   {"dim", c.denoiser.dim},
                   {"heads", c.denoiser.heads},
                   {"cond_dim", c.denoiser.cond_dim},
                   {"max_frames", c.denoiser.max_frames},
                   {"feature_dim", c.denoiser.feature_dim}};
  j["train"] = {{"steps", c.train.steps},       {"batch", c.train.batch},
                {"lr", c.train.adam.lr},         {"beta1", c.train.adam.beta1},
                {"beta2", c.train.adam.beta2},   {"eps", c.train.adam.eps},
                {"checkpoint_every", c.train.checkpoint_every}, {"threads", c.train.threads}};
  j["loss_weights"] = {{"simple", c.weights.simple}, {"foot", c.weights.foot},     {"pos", c.weights.pos},
                       {"rotvel", c.weights.rotvel}, {"posvel", c.weights.posvel}, {"hand", c.weights.hand},
                       {"bow", c.weights.bow}};
  j["synth"] = {{"train_takes", c.synth.train_takes},
                {"test_takes", c.synth.test_takes},
                {"notes_per_take", c.synth.notes_per_take},
                {"min_note_s", c.synth.min_note_s},
                {"max_note_s", c.synth.max_note_s},
                {"capture_jitter_deg", c.synth.capture_jitter_deg},
                {"capture_jitter_m", c.synth.capture_jitter_m}};
  json presets = json::array();
  for (const auto& p : c.ablation) presets.push_back({{"name", p.name}, {"hand", p.hand}, {"bow", p.bow}});
  j["ablation"] = presets;
  return j.dump(2) + "\n";
}

Assets load_assets(const RunConfig& config) {
  Assets a;
  a.skeleton = load_skeleton(config.skeleton_path);
  a.cello = load_cello(config.cello_path);
  return a;
}

// ---------------------------------------------------------------------------

RawTake raw_take_from_motion(const MotionSequence& motion, const Assets& assets, double jitter_deg, double jitter_m,
                             unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
  const double phase = u(rng);
  const Vec3 tdir = Vec3(n(rng), n(rng), n(rng)).normalized();
  RawTake raw;
  raw.fps = motion.fps;
  const Skeleton& sk = assets.skeleton;
  for (int k = 0; k < motion.frame_count(); ++k) {
    const double time = k / motion.fps;
    const double angle = jitter_deg * std::numbers::pi / 180.0 * std::sin(2 * std::numbers::pi * 0.1 * time + phase);
    const Mat3 R = axis_angle_matrix(angle * axis);
    const Vec3 t = jitter_m * std::cos(2 * std::numbers::pi * 0.07 * time + phase) * tdir;
    const Eigen::RowVectorXd row = motion.frames.row(k);
    const std::span<const double> frame(row.data(), row.size());
    const Pose pose = forward_kinematics(frame, sk);
    KeypointFrame f;
    for (int j = 0; j < sk.joint_count(); ++j) f[sk.joint(j).name] = R * pose.positions[j] + t;
    for (const auto& [name, p] : assets.cello.landmarks) f[name] = R * p + t;
    f["dir/bow"] = R * Vec3(frame[kRotationFeatures], frame[kRotationFeatures + 1], frame[kRotationFeatures + 2]);
    for (int s = 0; s < kRotatedJoints; ++s) {
      const std::string name = sk.joint(sk.rotated_joint(s)).name;
      f["rot6d/" + name + "/0"] = Vec3(frame[6 * s], frame[6 * s + 1], frame[6 * s + 2]);
      f["rot6d/" + name + "/1"] = Vec3(frame[6 * s + 3], frame[6 * s + 4], frame[6 * s + 5]);
    }
    raw.frames.push_back(std::move(f));
  }
  return raw;
}

int synthesize_dataset(const RunConfig& config, const std::string& dir) {
  config.validate();
  const Assets assets = load_assets(config);
  int written = 0;
  const std::pair<const char*, int> splits[] = {{"train", config.synth.train_takes}, {"test", config.synth.test_takes}};
  for (int si = 0; si < 2; ++si) {
    const auto& [split, count] = splits[si];
    for (int i = 0; i < count; ++i) {
      const unsigned long long seed = mix_seed(config.seed, si, i);
      const auto score = random_score(config.synth.notes_per_take, static_cast<unsigned>(seed & 0xFFFFFFFFu),
                                      assets.cello, config.synth.min_note_s, config.synth.max_note_s);
      SynthOptions o;
      o.fps = config.fps;
      o.seed = static_cast<unsigned>(seed >> 32);
      o.down_bow_first = (seed & 1) == 0;
      const SynthPerformance perf = synth_performance(score, assets.skeleton, assets.cello, o);
      const RawTake raw =
          raw_take_from_motion(perf.motion, assets, config.synth.capture_jitter_deg, config.synth.capture_jitter_m, seed);
      const fs::path base = fs::path(dir) / "raw" / split / take_name(i);
      write_file_atomic(base.string() + ".json", encode_raw_take(raw));
      const std::string wav = base.string() + ".wav";
      write_wav(wav + ".tmp", perf.audio, WavFormat::Float32);
      fs::rename(wav + ".tmp", wav);
      ++written;
    }
  }
  return written;
}

// ---------------------------------------------------------------------------

PreprocessSummary preprocess_take(const RunConfig& config, const std::string& raw_path, const std::string& audio_path,
                                  const std::string& out_prefix) {
  const Assets assets = load_assets(config);
  const Skeleton& sk = assets.skeleton;
  const RawTake raw = read_raw_take(raw_path, config.fps);
  require_landmarks(raw, assets.cello);
  const NormalizedTake norm = normalize_take(raw, assets.cello);

  MotionSequence motion;
  motion.fps = norm.fps;
  const int F = static_cast<int>(norm.frames.size());
  motion.frames.resize(F, kFeatureDim);
  for (int k = 0; k < F; ++k) {
    const KeypointFrame& f = norm.frames[k];
    auto key = [&](const std::string& name) -> const Vec3& {
      const auto it = f.find(name);
      if (it == f.end()) raise(ErrorCode::ParseError, "frame " + std::to_string(k) + " lacks " + name);
      return it->second;
    };
    for (int s = 0; s < kRotatedJoints; ++s) {
      const std::string name = sk.joint(sk.rotated_joint(s)).name;
      const Vec3& c0 = key("rot6d/" + name + "/0");
      const Vec3& c1 = key("rot6d/" + name + "/1");
      for (int c = 0; c < 3; ++c) {
        motion.frames(k, 6 * s + c) = c0(c);
        motion.frames(k, 6 * s + 3 + c) = c1(c);
      }
    }
    const Vec3& v = key("dir/bow");
    for (int c = 0; c < 3; ++c) motion.frames(k, kRotationFeatures + c) = v(c);
  }
  motion.validate();
  renormalize_bow_directions(motion);
  quantize_to_f32(motion);

  const AudioClip clip = read_wav(audio_path);
  clip.validate();
  const int Fa = frame_count_for(clip, motion.fps);
  if (std::abs(Fa - F) > 1) {
    raise(ErrorCode::FpsMismatch, "audio covers " + std::to_string(Fa) + " frames but the take has " + std::to_string(F));
  }
  std::vector<double> f0 = extract_f0(clip, motion.fps);
  f0.resize(F, f0.empty() ? 0.0 : f0.back());
  for (double& x : f0) {
    if (!(x > 0)) continue;
    try {
      pitch_to_positions(x, assets.cello);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoPlayablePosition) throw;
      x = 0.0;
    }
  }
  ConditionTrack cond;
  cond.fps = motion.fps;
  cond.f0 = f0;
  cond.features = build_features(f0, clip, motion.fps);
  annotate(cond, motion, sk, assets.cello);

  write_motion(out_prefix + ".motion", motion);
  write_condition(out_prefix + ".cond.jsonl", cond);

  PreprocessSummary s;
  s.frames = F;
  for (int k = 0; k < F; ++k) {
    s.mean_rmsd += norm.rmsd[k] / F;
    if (norm.rmsd[k] > s.max_rmsd) {
      s.max_rmsd = norm.rmsd[k];
      s.worst_frame = k;
    }
    s.voiced_frames += cond.voiced(k) ? 1 : 0;
  }
  return s;
}

std::vector<PreprocessSummary> preprocess_dataset(const RunConfig& config) {
  std::vector<PreprocessSummary> out;
  for (const char* split : {"train", "test"}) {
    const fs::path raw = fs::path(config.dataset_dir) / "raw" / split;
    for (const std::string& name : sorted_files(raw, ".json")) {
      out.push_back(preprocess_take(config, (raw / (name + ".json")).string(), (raw / (name + ".wav")).string(),
                                    (fs::path(config.dataset_dir) / "processed" / split / name).string()));
    }
  }
  return out;
}

std::vector<Take> load_split(const RunConfig& config, const std::string& split) {
  const fs::path dir = fs::path(config.dataset_dir) / "processed" / split;
  std::vector<Take> takes;
  for (const std::string& name : sorted_files(dir, ".motion")) {
    Take t;
    t.name = name;
    t.motion = read_motion((dir / (name + ".motion")).string());
    t.condition = read_condition((dir / (name + ".cond.jsonl")).string());
    if (t.motion.frame_count() != t.condition.frame_count()) {
      raise(ErrorCode::InvalidArgument, "take " + name + " has misaligned motion and condition");
    }
    takes.push_back(std::move(t));
  }
  return takes;
}

// ---------------------------------------------------------------------------

DenoiserParams train_run(const RunConfig& config, const std::string& out_dir) {
  config.validate();
  const Assets assets = load_assets(config);
  const std::vector<Take> takes = load_split(config, "train");
  if (takes.empty()) raise(ErrorCode::InvalidArgument, "training set is empty: no takes in " + config.dataset_dir);
  std::vector<TrainSample> data;
  for (const Take& t : takes) {
    auto s = make_slices(t.motion, t.condition, config.slice_frames, config.slice_stride);
    for (auto& x : s) data.push_back(std::move(x));
  }
  DenoiserConfig dc = config.denoiser;
  dc.max_frames = config.slice_frames;
  dc.cond_dim = static_cast<int>(takes[0].condition.features.cols());
  DenoiserParams params = init_denoiser(dc, config.seed);
  std::vector<Matrix> x0s;
  for (const TrainSample& s : data) x0s.push_back(s.x0);
  params.normalization = feature_statistics(x0s);
  const NoiseSchedule schedule = cosine_schedule(config.diffusion_steps_T);
  TrainSettings settings = config.train;
  settings.seed = mix_seed(config.seed, 7);
  settings.cond_dropout = config.cond_dropout;

  RunConfig echo = config;
  echo.denoiser = dc;
  const std::string cfg_json = run_config_json(echo);
  const std::string ckpt = (fs::path(out_dir) / "checkpoint.bin").string();
  std::vector<TrainLogRow> log;
  try {
    params = train_denoiser(data, params, schedule, config.weights, assets.skeleton, assets.cello, settings, &log,
                            [&](const DenoiserParams& p, int) { write_checkpoint(ckpt, p, cfg_json); });
  } catch (...) {
    write_file_atomic((fs::path(out_dir) / "train_log.csv").string(), encode_train_log(log));
    throw;
  }
  write_file_atomic((fs::path(out_dir) / "train_log.csv").string(), encode_train_log(log));
  write_file_atomic((fs::path(out_dir) / "config.json").string(), cfg_json);
  return params;
}

std::vector<int> generation_windows(int frames, int window, int overlap) {
  if (frames < 1 || window < 1) raise(ErrorCode::InvalidArgument, "bad generation length");
  if (frames <= window) return {0};
  const int stride = window - overlap;
  if (overlap < 2 || stride < 1) raise(ErrorCode::BadOverlap, "overlap must lie in [2, window - 1] frames");
  std::vector<int> starts;
  for (int s = 0;; s += stride) {
    starts.push_back(s);
    if (s + window >= frames) break;
  }
  return starts;
}

MotionSequence generate_motion(const DenoiserParams& params, const ConditionTrack& condition,
                               const GenerateOptions& o) {
  const int F = condition.frame_count();
  if (F < 1) raise(ErrorCode::InvalidArgument, "condition track is empty");
  if (condition.features.cols() != params.config.cond_dim) {
    raise(ErrorCode::ShapeMismatch, "condition has " + std::to_string(condition.features.cols()) +
                                        " features but the model expects " + std::to_string(params.config.cond_dim));
  }
  const int S = params.config.max_frames;
  const int overlap = static_cast<int>(std::lround(o.overlap_s * condition.fps));
  const std::vector<int> starts = generation_windows(F, S, overlap);
  const NoiseSchedule schedule = cosine_schedule(o.T);
  std::mt19937_64 rng(o.seed);
  std::vector<MotionSequence> segments;
  for (int start : starts) {
    const Matrix c = slice(condition, start, S).features;
    const X0Model model = guided_model(
        [&](const Matrix& x, int t, bool conditional) {
          return denoiser_forward(params, x, t, conditional ? &c : nullptr);
        },
        o.guidance_w);
    MotionSequence seg;
    seg.fps = condition.fps;
    seg.frames = params.normalization.from_model(
        ddim_sample_from(model, standard_normal(S, params.config.feature_dim, rng), schedule, o.steps));
    segments.push_back(std::move(seg));
  }
  MotionSequence out = segments.size() == 1 ? segments[0] : stitch_long_form(segments, overlap / condition.fps);
  out.frames.conservativeResize(F, Eigen::NoChange);
  renormalize_bow_directions(out);
  return out;
}

ConditionTrack condition_from_audio(const AudioClip& clip, double fps) {
  clip.validate();
  ConditionTrack c;
  c.fps = fps;
  c.f0 = extract_f0(clip, fps);
  c.features = build_features(c.f0, clip, fps);
  return c;
}

EvaluationReport evaluate_files(const RunConfig& config, const std::string& motion_path,
                                const std::string& condition_path, const std::string* gt_path) {
  const Assets assets = load_assets(config);
  const MotionSequence motion = read_motion(motion_path);
  const ConditionTrack cond = read_condition(condition_path);
  if (motion.frame_count() != cond.frame_count()) {
    raise(ErrorCode::InvalidArgument, "misaligned inputs: motion has " + std::to_string(motion.frame_count()) +
                                          " frames, condition has " + std::to_string(cond.frame_count()));
  }
  std::optional<MotionSequence> gt;
  if (gt_path) {
    gt = read_motion(*gt_path);
    if (gt->frame_count() != motion.frame_count()) {
      raise(ErrorCode::InvalidArgument, "misaligned inputs: ground truth has " + std::to_string(gt->frame_count()) +
                                            " frames, motion has " + std::to_string(motion.frame_count()));
    }
  }
  return evaluate_motion(motion, cond.f0, assets.skeleton, assets.cello, gt ? &*gt : nullptr);
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::vector<std::pair<std::string, EvaluationReport>> r;
  for (const auto& row : rows) r.emplace_back(row.name, row.report);
  return report_table(r);
}

std::vector<AblationRow> run_ablation(const RunConfig& config, const std::string& out_dir) {
  config.validate();
  if (load_split(config, "train").empty()) {
    if (sorted_files(fs::path(config.dataset_dir) / "raw" / "train", ".json").empty()) {
      synthesize_dataset(config, config.dataset_dir);
    }
    preprocess_dataset(config);
  }
  const Assets assets = load_assets(config);
  const std::vector<Take> test = load_split(config, "test");
  if (test.empty()) raise(ErrorCode::InvalidArgument, "test split is empty");
  std::vector<AblationRow> rows;
  json summary = json::array();
  for (const AblationPreset& preset : config.ablation) {
    RunConfig c = config;
    c.weights.hand = preset.hand;
    c.weights.bow = preset.bow;
    const fs::path dir = fs::path(out_dir) / slug(preset.name);
    const DenoiserParams params = train_run(c, dir.string());
    std::vector<EvaluationReport> reports;
    for (size_t i = 0; i < test.size(); ++i) {
      GenerateOptions o;
      o.guidance_w = c.guidance_w;
      o.steps = c.sample_steps;
      o.overlap_s = c.overlap_s;
      o.T = c.diffusion_steps_T;
      o.seed = mix_seed(c.seed, 11, i);
      MotionSequence gen = generate_motion(params, test[i].condition, o);
      quantize_to_f32(gen);
      write_motion((dir / "generated" / (test[i].name + ".motion")).string(), gen);
      reports.push_back(evaluate_motion(gen, test[i].condition.f0, assets.skeleton, assets.cello, &test[i].motion));
    }
    AblationRow row{preset.name, pool_reports(reports)};
    write_file_atomic((dir / "report.json").string(), report_json(row.report, false));
    summary.push_back(json::parse(report_json(row.report, false)));
    summary.back()["name"] = preset.name;
    rows.push_back(std::move(row));
  }
  write_file_atomic((fs::path(out_dir) / "ablation.json").string(), summary.dump(2) + "\n");
  write_file_atomic((fs::path(out_dir) / "ablation.txt").string(), ablation_table(rows));
  return rows;
}

}  // namespace elgar
