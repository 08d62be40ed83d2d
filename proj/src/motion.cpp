#include "elgar/motion.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "elgar/error.hpp"

namespace elgar {

namespace {

constexpr double kDegenerateEps = 1e-8;

Vec3 column(std::span<const double, 6> a, int c) { return {a[3 * c], a[3 * c + 1], a[3 * c + 2]}; }

}  // namespace

Mat3 rot6d_to_matrix(std::span<const double, 6> a) {
  const Vec3 a1 = column(a, 0);
  const Vec3 a2 = column(a, 1);
  const double n1 = a1.norm();
  const double n2 = a2.norm();
  if (!(n1 > kDegenerateEps) || !(n2 > kDegenerateEps)) {
    raise(ErrorCode::DegenerateRotation, "6D rotation has a vanishing column");
  }
  const Vec3 b1 = a1 / n1;
  const Vec3 a2n = a2 / n2;
  if ((a2n - b1.dot(a2n) * b1).norm() <= kDegenerateEps) {
    raise(ErrorCode::DegenerateRotation, "6D rotation columns are parallel");
  }
  const Vec3 u2 = a2 - b1.dot(a2) * b1;
  const Vec3 b2 = u2.normalized();
  Mat3 R;
  R.col(0) = b1;
  R.col(1) = b2;
  R.col(2) = b1.cross(b2);
  return R;
}

Mat3 rot6d_to_matrix(const Rot6D& r) { return rot6d_to_matrix(std::span<const double, 6>(r.a)); }

Rot6D matrix_to_rot6d(const Mat3& R) {
  if (!R.allFinite()) raise(ErrorCode::NotARotation, "matrix has non-finite entries");
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = R.determinant();
  if (ortho > 1e-6 || std::abs(det - 1.0) > 1e-6) {
    raise(ErrorCode::NotARotation,
          "matrix is not a proper rotation (orthogonality error " + std::to_string(ortho) + ", det " +
              std::to_string(det) + ")");
  }
  Rot6D out;
  for (int r = 0; r < 3; ++r) {
    out.a[r] = R(r, 0);
    out.a[3 + r] = R(r, 1);
  }
  return out;
}

void rot6d_to_matrix_backward(std::span<const double, 6> a, const Mat3& grad_R, std::span<double, 6> grad_a) {
  const Vec3 a1 = column(a, 0);
  const Vec3 a2 = column(a, 1);
  const double n1 = a1.norm();
  const Vec3 b1 = a1 / n1;
  const double proj = b1.dot(a2);
  const Vec3 u2 = a2 - proj * b1;
  const double nu = u2.norm();
  const Vec3 b2 = u2 / nu;

  const Vec3 g3 = grad_R.col(2);
  Vec3 gb1 = grad_R.col(0) + b2.cross(g3);
  const Vec3 gb2 = grad_R.col(1) + g3.cross(b1);

  const Vec3 gu2 = (gb2 - b2 * b2.dot(gb2)) / nu;
  const Vec3 ga2 = gu2 - b1 * b1.dot(gu2);
  gb1 -= a2 * b1.dot(gu2) + proj * gu2;
  const Vec3 ga1 = (gb1 - b1 * b1.dot(gb1)) / n1;

  for (int r = 0; r < 3; ++r) {
    grad_a[r] += ga1[r];
    grad_a[3 + r] += ga2[r];
  }
}

Mat3 axis_angle_matrix(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, rotvec / angle).toRotationMatrix();
}

// ---------------------------------------------------------------------------

void MotionSequence::validate() const {
  if (!(fps > 0) || !std::isfinite(fps)) raise(ErrorCode::InvalidArgument, "fps must be positive");
  if (frames.rows() < 1) raise(ErrorCode::InvalidArgument, "motion has no frames");
  if (frames.cols() != kFeatureDim) {
    raise(ErrorCode::ShapeMismatch, "motion feature dim " + std::to_string(frames.cols()) + " != 309");
  }
  if (!frames.allFinite()) raise(ErrorCode::InvalidArgument, "motion contains non-finite features");
}

std::array<Mat3, kRotatedJoints> decode_rotations(std::span<const double> frame) {
  if (frame.size() < static_cast<size_t>(kRotationFeatures)) {
    raise(ErrorCode::ShapeMismatch, "frame shorter than 306 rotation features");
  }
  std::array<Mat3, kRotatedJoints> out;
  for (int j = 0; j < kRotatedJoints; ++j) out[j] = rot6d_to_matrix(frame.subspan(6 * j).first<6>());
  return out;
}

Vec3 decode_bow_direction(std::span<const double> frame, bool* renormalized) {
  if (frame.size() < static_cast<size_t>(kFeatureDim)) raise(ErrorCode::ShapeMismatch, "frame shorter than 309");
  const Vec3 v(frame[kRotationFeatures], frame[kRotationFeatures + 1], frame[kRotationFeatures + 2]);
  const double n = v.norm();
  if (!(n > 1e-12)) raise(ErrorCode::DegenerateRotation, "bow direction has zero norm");
  if (renormalized) *renormalized = std::abs(n - 1.0) > 1e-6;
  return v / n;
}

std::vector<double> flatten(const MotionSequence& seq) {
  const int F = seq.frame_count();
  const int D = static_cast<int>(seq.frames.cols());
  std::vector<double> out(static_cast<size_t>(F) * D);
  for (int f = 0; f < F; ++f)
    for (int d = 0; d < D; ++d) out[static_cast<size_t>(f) * D + d] = seq.frames(f, d);
  return out;
}

MotionSequence unflatten(std::span<const double> data, int frames, double fps) {
  if (frames < 1 || data.size() != static_cast<size_t>(frames) * kFeatureDim) {
    raise(ErrorCode::ShapeMismatch, "flat motion buffer does not hold frames x 309 values");
  }
  MotionSequence seq;
  seq.fps = fps;
  seq.frames.resize(frames, kFeatureDim);
  for (int f = 0; f < frames; ++f)
    for (int d = 0; d < kFeatureDim; ++d) seq.frames(f, d) = data[static_cast<size_t>(f) * kFeatureDim + d];
  return seq;
}

void renormalize_bow_directions(MotionSequence& seq) {
  for (int f = 0; f < seq.frame_count(); ++f) {
    Eigen::Vector3d v = seq.frames.row(f).segment<3>(kRotationFeatures).transpose();
    const double n = v.norm();
    if (!(n > 1e-12)) raise(ErrorCode::DegenerateRotation, "bow direction has zero norm at frame " + std::to_string(f));
    seq.frames.row(f).segment<3>(kRotationFeatures) = (v / n).transpose();
  }
}

// ---------------------------------------------------------------------------

Pose forward_kinematics(std::span<const double> frame, const Skeleton& skeleton) {
  return forward_kinematics(frame, skeleton, skeleton.root_pose());
}

Pose forward_kinematics(std::span<const double> frame, const Skeleton& skeleton, const RigidTransform& root_pose) {
  const int n = skeleton.joint_count();
  Pose pose;
  pose.positions.resize(n);
  pose.world.resize(n);
  for (int i = 0; i < n; ++i) {
    const Joint& j = skeleton.joint(i);
    if (j.parent < 0) {
      pose.positions[i] = root_pose.t;
      pose.world[i] = root_pose.R;
      continue;
    }
    const Mat3& Wp = pose.world[j.parent];
    pose.positions[i] = pose.positions[j.parent] + Wp * j.offset;
    const int slot = skeleton.slot_of(i);
    if (slot >= 0) {
      if (frame.size() < static_cast<size_t>(6 * (slot + 1))) raise(ErrorCode::ShapeMismatch, "frame too short for skeleton");
      pose.world[i] = Wp * rot6d_to_matrix(frame.subspan(6 * slot).first<6>());
    } else {
      pose.world[i] = Wp;
    }
  }
  return pose;
}

void forward_kinematics_backward(std::span<const double> frame, const Skeleton& skeleton, const Pose& pose,
                                 std::span<const Vec3> grad_positions, std::span<double> grad_frame) {
  const int n = skeleton.joint_count();
  std::vector<Vec3> gp(grad_positions.begin(), grad_positions.end());
  std::vector<Mat3> gW(n, Mat3::Zero());
  for (int i = n - 1; i >= 0; --i) {
    const Joint& j = skeleton.joint(i);
    if (j.parent < 0) continue;
    const int p = j.parent;
    gp[p] += gp[i];
    gW[p] += gp[i] * j.offset.transpose();
    const int slot = skeleton.slot_of(i);
    if (slot >= 0) {
      const auto a = frame.subspan(6 * slot).first<6>();
      const Mat3 R = rot6d_to_matrix(a);
      gW[p] += gW[i] * R.transpose();
      const Mat3 gR = pose.world[p].transpose() * gW[i];
      rot6d_to_matrix_backward(a, gR, grad_frame.subspan(6 * slot).first<6>());
    } else {
      gW[p] += gW[i];
    }
  }
}

// ---------------------------------------------------------------------------

BowPose bow_endpoints(const Pose& pose, const Skeleton& skeleton, const Vec3& direction, double bow_length) {
  if (!(bow_length > 0)) raise(ErrorCode::InvalidArgument, "bow length must be positive");
  const SkeletonAnchors& an = skeleton.anchors();
  Vec3 frog = Vec3::Zero();
  for (int k = 0; k < 3; ++k) frog += 0.5 * (pose.positions.at(an.bow_pip[k]) + pose.positions.at(an.bow_dip[k]));
  frog /= 3.0;
  const double n = direction.norm();
  if (!(n > 1e-12)) raise(ErrorCode::DegenerateRotation, "bow direction has zero norm");
  BowPose out;
  out.direction = direction / n;
  out.renormalized = std::abs(n - 1.0) > 1e-6;
  out.frog = frog;
  out.tip = frog + bow_length * out.direction;
  return out;
}

BowPose frame_bow(std::span<const double> frame, const Skeleton& skeleton, const Pose& pose, double bow_length) {
  const Vec3 v(frame[kRotationFeatures], frame[kRotationFeatures + 1], frame[kRotationFeatures + 2]);
  return bow_endpoints(pose, skeleton, v, bow_length);
}

}  // namespace elgar
