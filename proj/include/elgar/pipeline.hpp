#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elgar/audio.hpp"
#include "elgar/denoiser.hpp"
#include "elgar/geometry.hpp"
#include "elgar/metrics.hpp"
#include "elgar/train.hpp"

namespace elgar {

struct SynthDatasetConfig {
  int train_takes = 12;
  int test_takes = 3;
  int notes_per_take = 10;
  double min_note_s = 0.4;
  double max_note_s = 0.9;
  double capture_jitter_deg = 10.0;  ///< raw takes are moved by a slow rigid drift
  double capture_jitter_m = 0.05;
};

struct AblationPreset {
  std::string name;
  double hand = 0.0;
  double bow = 0.0;
};

/// Everything a run needs.  Relative paths resolve against the config file's directory.
struct RunConfig {
  std::string skeleton_path;
  std::string cello_path;
  std::string dataset_dir = "dataset";
  std::string output_dir = "run";
  unsigned long long seed = 0;
  double fps = kDefaultFps;

  int diffusion_steps_T = 1000;
  int sample_steps = 50;
  double guidance_w = 1.0;
  double cond_dropout = 0.10;
  double overlap_s = 4.0;
  int slice_frames = 150;
  int slice_stride = 30;

  DenoiserConfig denoiser;
  TrainSettings train;
  LossWeights weights;
  SynthDatasetConfig synth;
  std::vector<AblationPreset> ablation{{"w/o ICL", 0.0, 0.0}, {"w/ HICL", 10.0, 0.0}, {"w/ HICL+BICL", 10.0, 10.0}};

  void validate() const;
};

/// Defaults point at the shipped skeleton and cello.
RunConfig default_run_config();
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const std::string& text, const std::string& base_dir);
std::string run_config_json(const RunConfig& config);

struct Assets {
  Skeleton skeleton;
  CelloSpec cello;
};
Assets load_assets(const RunConfig& config);

// --- synthetic data --------------------------------------------------------

/// Raw takes and WAVs under <dir>/raw/{train,test}/take_NNN.{json,wav}.  Returns take count.
int synthesize_dataset(const RunConfig& config, const std::string& dir);

/// Rigidly drifted keypoints of a performance in the raw-take encoding.
RawTake raw_take_from_motion(const MotionSequence& motion, const Assets& assets, double jitter_deg, double jitter_m,
                             unsigned long long seed);

// --- preprocess ------------------------------------------------------------

struct PreprocessSummary {
  int frames = 0;
  double mean_rmsd = 0.0;
  double max_rmsd = 0.0;
  int worst_frame = 0;
  int voiced_frames = 0;
};

/// Normalizes a raw take, extracts f0 from the audio, annotates, and writes
/// <out_prefix>.motion and <out_prefix>.cond.jsonl.
PreprocessSummary preprocess_take(const RunConfig& config, const std::string& raw_path, const std::string& audio_path,
                                  const std::string& out_prefix);

/// Every raw take in <dataset>/raw/{train,test} into <dataset>/processed/{train,test}.
std::vector<PreprocessSummary> preprocess_dataset(const RunConfig& config);

struct Take {
  std::string name;
  MotionSequence motion;
  ConditionTrack condition;
};
/// Processed takes of a split, sorted by name.
std::vector<Take> load_split(const RunConfig& config, const std::string& split);

// --- train / generate / evaluate --------------------------------------------

/// Trains on the processed train split; writes checkpoint.bin, train_log.csv and config.json
/// into `out_dir`.
DenoiserParams train_run(const RunConfig& config, const std::string& out_dir);

struct GenerateOptions {
  double guidance_w = 1.0;
  int steps = 50;
  double overlap_s = 4.0;
  unsigned long long seed = 0;
  int T = 1000;
};

/// Long-form sampling: windows of max_frames frames advanced by (window - overlap), each
/// condition window padded with the final frame, stitched, trimmed to the condition length,
/// bow directions renormalized.
MotionSequence generate_motion(const DenoiserParams& params, const ConditionTrack& condition,
                               const GenerateOptions& options);

/// Window start frames used by generate_motion.
std::vector<int> generation_windows(int frames, int window, int overlap_frames);

/// Features from audio: extract_f0 then build_features.
ConditionTrack condition_from_audio(const AudioClip& clip, double fps);

EvaluationReport evaluate_files(const RunConfig& config, const std::string& motion_path,
                                const std::string& condition_path, const std::string* gt_path);

struct AblationRow {
  std::string name;
  EvaluationReport report;
};

/// Trains one model per preset from the same seed, generates the test split, evaluates.
/// Writes <out_dir>/<preset>/..., ablation.json and ablation.txt.
std::vector<AblationRow> run_ablation(const RunConfig& config, const std::string& out_dir);

std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace elgar
