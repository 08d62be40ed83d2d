#pragma once

#include <optional>
#include <span>
#include <vector>

#include "elgar/audio.hpp"
#include "elgar/cello.hpp"
#include "elgar/condition.hpp"
#include "elgar/motion.hpp"

namespace elgar {

struct ScoreNote {
  double pitch_hz = 0.0;  ///< 0 = rest
  double duration_s = 0.5;
  int string = 0;
  std::optional<int> finger;  ///< 0..3 index..pinky; none = open string
};

struct SynthOptions {
  double fps = kDefaultFps;
  double sample_rate = 44100.0;
  double amplitude = 0.5;
  double contact_from_bridge = 0.07;  ///< bow sounding point, meters from the bridge
  double bow_low = 0.15;              ///< contact parameter range along the bow (0 frog, 1 tip)
  double bow_high = 0.6;
  double sway_deg = 2.0;              ///< slow torso sway amplitude
  bool down_bow_first = true;
  unsigned seed = 0;
};

struct SynthPerformance {
  AudioClip audio;
  ConditionTrack condition;  ///< exact f0, features, annotations, foot labels
  MotionSequence motion;
  std::vector<int> attack_frames;  ///< bow reversals at note boundaries
  std::vector<int> note_start_frames;
};

/// Sawtooth audio, exact annotations and an analytic performer.  The note finger sits on the
/// contact point and the bow crosses the activating string at a fixed sounding point while the
/// contact slides between bow_low and bow_high, reversing at every note boundary.
SynthPerformance synth_performance(std::span<const ScoreNote> score, const Skeleton& skeleton, const CelloSpec& cello,
                                   const SynthOptions& options = {});

/// Unit bow direction tangent to the string arch at `string`, at `from_bridge` meters from the bridge.
Vec3 arch_bow_direction(const CelloSpec& cello, int string, double from_bridge);

/// Weighted sum of joint positions driven onto a target.
struct IkEffector {
  std::vector<std::pair<int, double>> joints;
  Vec3 target = Vec3::Zero();
};

/// Damped least squares over the world-frame rotations of `chain` (3 DOF each), editing the
/// frame's 6D features in place.  Returns the final residual; throws InvalidArgument when the
/// target stays farther than `tolerance` after `max_iterations`.
double solve_ik(std::span<double> frame, const Skeleton& skeleton, std::span<const int> chain, const IkEffector& effector,
                double tolerance = 1e-11, int max_iterations = 200);

/// A seeded random playable score of `notes` notes.
std::vector<ScoreNote> random_score(int notes, unsigned seed, const CelloSpec& cello, double min_duration = 0.4,
                                    double max_duration = 0.9);

}  // namespace elgar
