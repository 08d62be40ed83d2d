#pragma once

#include <span>
#include <string>
#include <vector>

#include "elgar/types.hpp"

namespace elgar {

struct AudioClip {
  double sample_rate = 44100.0;
  std::vector<double> samples;  ///< mono, [-1, 1]

  double duration() const { return samples.size() / sample_rate; }
  void validate() const;
};

enum class WavFormat { Pcm16, Float32 };

/// PCM 16-bit or IEEE float 32-bit; multi-channel input is downmixed by averaging.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip, WavFormat format = WavFormat::Float32);

/// Frames covering the clip at the given rate (at least one).
int frame_count_for(const AudioClip& clip, double fps);

struct PitchTrackerConfig {
  int window = 2048;         ///< analysis frame; half of it is the integration window
  double threshold = 0.15;   ///< cumulative-mean-normalized difference threshold
  double min_hz = 60.0;
  double max_hz = 1200.0;
  double silence_rms = 1e-4;
};

/// Monophonic f0 per frame at hop 1/fps via the cumulative-mean-normalized difference
/// function with parabolic refinement.  Unvoiced frames are 0.
std::vector<double> extract_f0(const AudioClip& clip, double fps, const PitchTrackerConfig& config = {});

inline constexpr int kConditionFeatures = 4;

/// Per frame: normalized log-f0 (0 when unvoiced), voicing flag, RMS energy over the frame's hop,
/// and the frame-delta of the normalized log-f0 (0 unless both frames are voiced).
Matrix build_features(std::span<const double> f0, const AudioClip& clip, double fps);

double normalized_log_f0(double f0);

}  // namespace elgar
