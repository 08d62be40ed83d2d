#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "elgar/cello.hpp"
#include "elgar/motion.hpp"
#include "elgar/types.hpp"

namespace elgar {

/// Ground-truth side of the contact losses for one voiced frame.
struct FrameAnnotation {
  ContactIntent intent;
  std::optional<int> note_finger;               ///< none on open strings
  std::array<double, 4> finger_distances{};     ///< GT fingertip-to-contact distance, index..pinky
  std::array<double, 2> bow_endpoint_distances{};  ///< GT frog / tip distance to the activating string
};

struct ConditionTrack {
  double fps = kDefaultFps;
  std::vector<double> f0;                             ///< Hz, 0 = unvoiced
  Matrix features;                                    ///< frames x D
  std::vector<std::optional<FrameAnnotation>> annotations;  ///< empty or one per frame
  std::vector<bool> foot_contact;                     ///< empty or one per frame

  int frame_count() const { return static_cast<int>(f0.size()); }
  bool voiced(int frame) const { return f0[frame] > 0.0; }
  bool annotated() const { return !annotations.empty(); }
  void validate() const;
};

/// Frames [begin, begin + count) with final-frame padding past the end.
ConditionTrack slice(const ConditionTrack& track, int begin, int count);

/// Derives the annotation of one frame from a ground-truth pose.
FrameAnnotation annotate_frame(double f0, const Pose& pose, const BowPose& bow, const Skeleton& skeleton,
                               const CelloSpec& cello);

/// Annotations and foot-contact labels for a whole ground-truth motion.
void annotate(ConditionTrack& track, const MotionSequence& motion, const Skeleton& skeleton, const CelloSpec& cello);

/// Feet count as planted when they move less than this per frame.
inline constexpr double kFootContactSpeed = 0.005;
std::vector<bool> foot_contact_labels(const MotionSequence& motion, const Skeleton& skeleton);

}  // namespace elgar
