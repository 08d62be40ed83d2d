#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elgar/cello.hpp"
#include "elgar/motion.hpp"

namespace elgar {

/// Mean over the frames that count, plus a per-frame trace (NaN where a frame is excluded).
struct DistanceMetric {
  double mean_mm = 0.0;
  int frames = 0;
  std::vector<double> trace_mm;
};

/// Per voiced, non-open frame: distance of the nearest (candidate, fingertip) pair.
/// Frames whose f0 has no playable position are excluded.  Throws NoVoicedFrames.
DistanceMetric finger_contact_distance(const MotionSequence& seq, std::span<const double> f0,
                                       const Skeleton& skeleton, const CelloSpec& cello);

/// Per voiced frame: bow segment to the activating string of the frame's intent.
DistanceMetric bow_string_distance(const MotionSequence& seq, std::span<const double> f0, const Skeleton& skeleton,
                                   const CelloSpec& cello);

struct AttackDetector {
  int smoothing = 5;   ///< centered moving-average window (frames)
  int hysteresis = 2;  ///< a new direction must hold this many frame deltas
};

/// s(k) = (frog(k) - bridge_center) . v(k).
std::vector<double> bow_travel_signal(const MotionSequence& seq, const Skeleton& skeleton, const CelloSpec& cello);

/// Direction reversals of a travel signal; each attack is the turning-point frame.
std::vector<int> attacks_from_signal(std::span<const double> s, const AttackDetector& detector = {});

std::vector<int> detect_bowing_attacks(const MotionSequence& seq, const Skeleton& skeleton, const CelloSpec& cello,
                                       const AttackDetector& detector = {});

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int true_positives = 0;
  int predicted = 0;
  int actual = 0;
};

/// Greedy one-to-one matching in time order: each prediction takes the earliest unmatched
/// ground-truth attack within +-delta.  Two empty lists score 1; otherwise an empty side scores 0.
F1Score bowing_f1(std::span<const int> pred, std::span<const int> gt, int delta = 3);
F1Score f1_from_counts(int true_positives, int predicted, int actual);

/// Cosine similarity of the signed contact position 2u - 1 along the bow over voiced frames,
/// each sequence judged against its own intent.  Throws NoVoicedFrames or ZeroVector.
double bowing_cosine_similarity(const MotionSequence& gen, const MotionSequence& gt, std::span<const double> f0,
                                const Skeleton& skeleton, const CelloSpec& cello);

struct EvaluationReport {
  DistanceMetric fcd;
  DistanceMetric bsd;
  std::optional<F1Score> bowing;
  std::optional<double> bcs;
  std::vector<int> predicted_attacks;
  std::vector<int> gt_attacks;
};

EvaluationReport evaluate_motion(const MotionSequence& seq, std::span<const double> f0, const Skeleton& skeleton,
                                 const CelloSpec& cello, const MotionSequence* gt = nullptr, int delta = 3);

/// Pools several takes: distances frame-weighted, F1 from summed counts, BCS averaged per take.
EvaluationReport pool_reports(std::span<const EvaluationReport> reports);

/// JSON text (traces included when `with_traces`).
std::string report_json(const EvaluationReport& report, bool with_traces = true);

/// Aligned plain-text table: Method | FCD (mm) | BSD (mm) | BF1 | BCS.
std::string report_table(std::span<const std::pair<std::string, EvaluationReport>> rows);

}  // namespace elgar
