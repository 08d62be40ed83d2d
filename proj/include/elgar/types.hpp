#pragma once

#include <Eigen/Core>

namespace elgar {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// x' = R x + t
struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  RigidTransform inverse() const { return {R.transpose(), -(R.transpose() * t)}; }
  RigidTransform compose(const RigidTransform& inner) const { return {R * inner.R, R * inner.t + t}; }

  static RigidTransform identity() { return {}; }
};

/// A straight segment between two points.
struct Segment {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
};

}  // namespace elgar
