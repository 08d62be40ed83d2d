#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "elgar/types.hpp"

namespace elgar {

inline constexpr int kBodyJoints = 21;
inline constexpr int kHandJoints = 15;
inline constexpr int kRotatedJoints = kBodyJoints + 2 * kHandJoints;  // 51
inline constexpr int kRotationFeatures = 6 * kRotatedJoints;           // 306
inline constexpr int kBowFeatures = 3;
inline constexpr int kFeatureDim = kRotationFeatures + kBowFeatures;   // 309
inline constexpr double kDefaultFps = 30.0;

/// First two columns of a rotation matrix: (R00, R10, R20, R01, R11, R21).
struct Rot6D {
  std::array<double, 6> a{1, 0, 0, 0, 1, 0};
};

/// Gram-Schmidt on the two stored columns, third column by cross product.
/// Throws DegenerateRotation when the first column vanishes or the columns are parallel.
Mat3 rot6d_to_matrix(const Rot6D& r);
Mat3 rot6d_to_matrix(std::span<const double, 6> a);

/// Throws NotARotation unless R is orthonormal with det +1 (tolerance 1e-6).
Rot6D matrix_to_rot6d(const Mat3& R);

/// Reverse-mode companion of rot6d_to_matrix: accumulates dL/da given dL/dR.
void rot6d_to_matrix_backward(std::span<const double, 6> a, const Mat3& grad_R, std::span<double, 6> grad_a);

/// Exponential map of a rotation vector.
Mat3 axis_angle_matrix(const Vec3& rotvec);

// ---------------------------------------------------------------------------
// Skeleton

struct Joint {
  std::string name;
  int parent = -1;
  Vec3 offset = Vec3::Zero();
  /// Virtual joints (fingertips) follow their parent's rotation and own no feature slot.
  bool rotated = true;
};

/// Named roles the artifact relies on.  Hand anchors refer to the bow hand for
/// PIP/DIP and to the fingering hand for the fingertips.
struct SkeletonAnchors {
  std::array<int, 3> bow_pip{};  ///< thumb, middle, ring
  std::array<int, 3> bow_dip{};
  std::array<int, 4> fingertips{};  ///< index, middle, ring, pinky of the fingering hand
  std::array<int, 2> feet{};
  std::array<int, 2> wrists{};  ///< left, right
};

class Skeleton {
 public:
  Skeleton() = default;
  Skeleton(std::vector<Joint> joints, const std::unordered_map<std::string, std::string>& anchors,
           RigidTransform root_pose);

  const std::vector<Joint>& joints() const { return joints_; }
  int joint_count() const { return static_cast<int>(joints_.size()); }
  const Joint& joint(int i) const { return joints_.at(i); }
  std::optional<int> find(const std::string& name) const;
  int index_of(const std::string& name) const;

  /// Joint index owning feature slot k (0..50).
  int rotated_joint(int slot) const { return slot_to_joint_.at(slot); }
  /// Feature slot of joint i, or -1 for the root and virtual joints.
  int slot_of(int joint) const { return joint_to_slot_.at(joint); }

  const SkeletonAnchors& anchors() const;
  bool has_anchors() const { return anchors_.has_value(); }
  const std::unordered_map<std::string, std::string>& anchor_names() const { return anchor_names_; }
  const RigidTransform& root_pose() const { return root_pose_; }

  /// True when `ancestor` lies on the parent chain of `joint` (or equals it).
  bool is_descendant(int joint, int ancestor) const;

 private:
  std::vector<Joint> joints_;
  std::vector<int> slot_to_joint_;
  std::vector<int> joint_to_slot_;
  std::unordered_map<std::string, std::string> anchor_names_;
  std::optional<SkeletonAnchors> anchors_;
  RigidTransform root_pose_;
};

Skeleton load_skeleton(const std::string& path);
Skeleton skeleton_from_json_text(const std::string& text);

// ---------------------------------------------------------------------------
// Motion

/// F frames x 309 features, one row per frame.
struct MotionSequence {
  double fps = kDefaultFps;
  Matrix frames;

  int frame_count() const { return static_cast<int>(frames.rows()); }
  /// Throws ShapeMismatch / InvalidArgument when the representation invariants fail.
  void validate() const;
};

/// Rotation part of one frame in slot order.
std::array<Mat3, kRotatedJoints> decode_rotations(std::span<const double> frame);
/// Bow direction of one frame renormalized to unit length; zero norm throws DegenerateRotation.
Vec3 decode_bow_direction(std::span<const double> frame, bool* renormalized = nullptr);

/// Row-major flattening of a sequence (frame-major), and its inverse.
std::vector<double> flatten(const MotionSequence& seq);
MotionSequence unflatten(std::span<const double> data, int frames, double fps);

/// Renormalize every frame's bow direction to unit length in place.
void renormalize_bow_directions(MotionSequence& seq);

// ---------------------------------------------------------------------------
// Forward kinematics

struct Pose {
  std::vector<Vec3> positions;  ///< every skeleton joint, including root and virtual joints
  std::vector<Mat3> world;      ///< world rotation per joint
};

Pose forward_kinematics(std::span<const double> frame, const Skeleton& skeleton);
Pose forward_kinematics(std::span<const double> frame, const Skeleton& skeleton, const RigidTransform& root_pose);

/// Given dL/d(position) for every joint, accumulates dL/d(frame) into grad_frame (rotation
/// features only; the bow slots are untouched).
void forward_kinematics_backward(std::span<const double> frame, const Skeleton& skeleton, const Pose& pose,
                                 std::span<const Vec3> grad_positions, std::span<double> grad_frame);

// ---------------------------------------------------------------------------
// Bow

struct BowPose {
  Vec3 frog;
  Vec3 tip;
  Vec3 direction;  ///< unit
  bool renormalized = false;
};

/// frog = mean of the PIP/DIP midpoints of the bow hand's thumb, middle and ring fingers;
/// tip = frog + length * direction.  Non-unit directions are renormalized (flagged).
BowPose bow_endpoints(const Pose& pose, const Skeleton& skeleton, const Vec3& direction, double bow_length);

/// Convenience: FK plus bow for one frame.
BowPose frame_bow(std::span<const double> frame, const Skeleton& skeleton, const Pose& pose, double bow_length);

}  // namespace elgar
