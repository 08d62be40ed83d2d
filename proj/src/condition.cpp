#include "elgar/condition.hpp"

#include <cmath>

#include "elgar/error.hpp"
#include "elgar/geometry.hpp"

namespace elgar {

void ConditionTrack::validate() const {
  if (!(fps > 0)) raise(ErrorCode::InvalidArgument, "condition fps must be positive");
  const int F = frame_count();
  if (features.rows() != F) raise(ErrorCode::ShapeMismatch, "condition features do not match the f0 track length");
  if (!annotations.empty() && static_cast<int>(annotations.size()) != F) {
    raise(ErrorCode::ShapeMismatch, "condition annotations do not match the f0 track length");
  }
  if (!foot_contact.empty() && static_cast<int>(foot_contact.size()) != F) {
    raise(ErrorCode::ShapeMismatch, "foot contact labels do not match the f0 track length");
  }
  for (double f : f0)
    if (!(f >= 0) || !std::isfinite(f)) raise(ErrorCode::InvalidArgument, "f0 must be finite and >= 0");
  if (!features.allFinite()) raise(ErrorCode::InvalidArgument, "condition features are not finite");
}

ConditionTrack slice(const ConditionTrack& track, int begin, int count) {
  const int F = track.frame_count();
  if (F < 1 || begin < 0 || begin >= F || count < 1) raise(ErrorCode::InvalidArgument, "bad condition slice");
  ConditionTrack out;
  out.fps = track.fps;
  out.f0.resize(count);
  out.features.resize(count, track.features.cols());
  if (track.annotated()) out.annotations.resize(count);
  if (!track.foot_contact.empty()) out.foot_contact.resize(count);
  for (int k = 0; k < count; ++k) {
    const int src = std::min(begin + k, F - 1);
    out.f0[k] = track.f0[src];
    out.features.row(k) = track.features.row(src);
    if (track.annotated()) out.annotations[k] = track.annotations[src];
    if (!track.foot_contact.empty()) out.foot_contact[k] = track.foot_contact[src];
  }
  return out;
}

FrameAnnotation annotate_frame(double f0, const Pose& pose, const BowPose& bow, const Skeleton& skeleton,
                               const CelloSpec& cello) {
  const SkeletonAnchors& an = skeleton.anchors();
  std::array<Vec3, 4> tips;
  for (int k = 0; k < 4; ++k) tips[k] = pose.positions[an.fingertips[k]];
  const IntentChoice choice = select_intent(f0, tips, cello);
  FrameAnnotation a;
  a.intent = choice.intent;
  a.note_finger = choice.note_finger;
  for (int k = 0; k < 4; ++k) a.finger_distances[k] = (tips[k] - choice.intent.point).norm();
  const Segment seg = activating_string(choice.intent, cello);
  a.bow_endpoint_distances[0] = point_segment_distance(bow.frog, seg).distance;
  a.bow_endpoint_distances[1] = point_segment_distance(bow.tip, seg).distance;
  return a;
}

void annotate(ConditionTrack& track, const MotionSequence& motion, const Skeleton& skeleton, const CelloSpec& cello) {
  if (motion.frame_count() != track.frame_count()) {
    raise(ErrorCode::ShapeMismatch, "motion and condition frame counts differ");
  }
  track.annotations.assign(track.frame_count(), std::nullopt);
  for (int f = 0; f < motion.frame_count(); ++f) {
    if (!track.voiced(f)) continue;
    const Eigen::RowVectorXd row = motion.frames.row(f);
    const std::span<const double> frame(row.data(), row.size());
    const Pose pose = forward_kinematics(frame, skeleton);
    const BowPose bow = frame_bow(frame, skeleton, pose, cello.bow_length);
    track.annotations[f] = annotate_frame(track.f0[f], pose, bow, skeleton, cello);
  }
  track.foot_contact = foot_contact_labels(motion, skeleton);
}

std::vector<bool> foot_contact_labels(const MotionSequence& motion, const Skeleton& skeleton) {
  const int F = motion.frame_count();
  const SkeletonAnchors& an = skeleton.anchors();
  std::vector<std::array<Vec3, 2>> feet(F);
  for (int f = 0; f < F; ++f) {
    const Eigen::RowVectorXd row = motion.frames.row(f);
    const Pose pose = forward_kinematics(std::span<const double>(row.data(), row.size()), skeleton);
    feet[f] = {pose.positions[an.feet[0]], pose.positions[an.feet[1]]};
  }
  std::vector<bool> labels(F, true);
  for (int f = 0; f + 1 < F; ++f) {
    const double speed = std::max((feet[f + 1][0] - feet[f][0]).norm(), (feet[f + 1][1] - feet[f][1]).norm());
    labels[f] = speed < kFootContactSpeed;
  }
  if (F > 1) labels[F - 1] = labels[F - 2];
  return labels;
}

}  // namespace elgar
