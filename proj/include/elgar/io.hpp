#pragma once

#include <string>
#include <vector>

#include "elgar/condition.hpp"
#include "elgar/denoiser.hpp"
#include "elgar/geometry.hpp"
#include "elgar/motion.hpp"
#include "elgar/train.hpp"

namespace elgar {

/// Whole-file read; IoError when missing.
std::string read_file(const std::string& path);
/// Writes `path.tmp` then renames it over `path`; parent directories are created.
void write_file_atomic(const std::string& path, const std::string& bytes);

// Motion file, little endian:
//   "ELGR" | u32 version (1) | f32 fps | u32 frames | u32 dim (309) | frames*dim f32, frame-major
inline constexpr unsigned kMotionFileVersion = 1;
std::string encode_motion(const MotionSequence& seq);
MotionSequence decode_motion(const std::string& bytes);
void write_motion(const std::string& path, const MotionSequence& seq);
MotionSequence read_motion(const std::string& path);
/// Round-trips every feature through 32-bit storage precision.
void quantize_to_f32(MotionSequence& seq);

// Condition file: JSON lines.  Line 1 is a header
//   {"format":"elgar-condition","version":1,"fps":..,"frames":F,"feature_dim":D}
// then one object per frame: frame, f0, features, foot_contact, annotation (null or
// {string, point, distance_from_nut, open, note_finger, finger_distances, bow_endpoint_distances}).
std::string encode_condition(const ConditionTrack& track);
ConditionTrack decode_condition(const std::string& text);
void write_condition(const std::string& path, const ConditionTrack& track);
ConditionTrack read_condition(const std::string& path);

// Raw take: JSON array of frames (name -> [x, y, z]); an object {"fps": .., "frames": [..]} is
// also accepted.
std::string encode_raw_take(const RawTake& take);
RawTake decode_raw_take(const std::string& text, double default_fps = kDefaultFps);
RawTake read_raw_take(const std::string& path, double default_fps = kDefaultFps);

// Checkpoint, little endian:
//   "ELGRCKPT" | u32 version (1) | u32 n | n bytes of config JSON | u64 count | count f64
//   | feature_dim f64 normalization mean | feature_dim f64 normalization scale
// Parameters follow the tensor declaration order of DenoiserParams.
inline constexpr unsigned kCheckpointVersion = 1;
std::string encode_checkpoint(const DenoiserParams& params, const std::string& config_json);
DenoiserParams decode_checkpoint(const std::string& bytes, std::string* config_json = nullptr);
void write_checkpoint(const std::string& path, const DenoiserParams& params, const std::string& config_json);
DenoiserParams read_checkpoint(const std::string& path, std::string* config_json = nullptr);

std::string denoiser_config_json(const DenoiserConfig& config);
DenoiserConfig denoiser_config_from_json(const std::string& text);

/// CSV: step,simple,foot,pos,rotvel,posvel,hand,bow,total
std::string encode_train_log(const std::vector<TrainLogRow>& rows);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace elgar
