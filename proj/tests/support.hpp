#pragma once

#include <Eigen/Geometry>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "elgar/cello.hpp"
#include "elgar/motion.hpp"
#include "elgar/synth.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(ELGAR_TEST_DATA_DIR) + "/" + name; }

inline const elgar::Skeleton& skeleton() {
  static const elgar::Skeleton sk = elgar::load_skeleton(data_path("skeleton.json"));
  return sk;
}

inline const elgar::CelloSpec& cello() {
  static const elgar::CelloSpec c = elgar::load_cello(data_path("cello.json"));
  return c;
}

// Uniform on SO(3) via a normalized Gaussian quaternion.
inline elgar::Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline elgar::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  elgar::Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

// Rotation features near identity (angles up to `spread` rad) plus a unit bow direction.
inline Eigen::RowVectorXd random_frame(std::mt19937_64& rng, double spread = 0.4) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Eigen::RowVectorXd f(elgar::kFeatureDim);
  for (int s = 0; s < elgar::kRotatedJoints; ++s) {
    const elgar::Mat3 R = elgar::axis_angle_matrix(elgar::Vec3(u(rng), u(rng), u(rng)));
    const elgar::Rot6D r = elgar::matrix_to_rot6d(R);
    for (int i = 0; i < 6; ++i) f(6 * s + i) = r.a[i];
  }
  const elgar::Vec3 v = random_unit(rng);
  f.tail<3>() = v.transpose();
  return f;
}

inline elgar::SynthPerformance performance(int notes, unsigned seed) {
  const auto score = elgar::random_score(notes, seed, cello());
  elgar::SynthOptions o;
  o.seed = seed;
  return elgar::synth_performance(score, skeleton(), cello(), o);
}

// Rotates joint `j`'s world frame by `angle` about the world `axis`, moving its subtree rigidly
// about the joint.
inline void rotate_joint_world(Eigen::RowVectorXd& frame, const elgar::Skeleton& sk, int j, const elgar::Vec3& axis,
                               double angle) {
  const std::span<const double> s(frame.data(), frame.size());
  const elgar::Pose pose = elgar::forward_kinematics(s, sk);
  const elgar::Mat3& Wp = pose.world[sk.joint(j).parent];
  const int slot = sk.slot_of(j);
  const elgar::Mat3 R = elgar::rot6d_to_matrix(s.subspan(6 * slot).first<6>());
  const elgar::Mat3 Rn = Wp.transpose() * elgar::axis_angle_matrix(axis.normalized() * angle) * Wp * R;
  const elgar::Rot6D r = elgar::matrix_to_rot6d(Rn);
  for (int i = 0; i < 6; ++i) frame(6 * slot + i) = r.a[i];
}

// Moves the bow hand (by IK on the right arm) so the bow shifts by `offset`; the bow
// direction is unchanged.
inline void shift_bow(Eigen::RowVectorXd& frame, const elgar::Skeleton& sk, const elgar::Vec3& offset) {
  const std::span<const double> s(frame.data(), frame.size());
  const elgar::Pose pose = elgar::forward_kinematics(s, sk);
  const auto& an = sk.anchors();
  elgar::IkEffector e;
  elgar::Vec3 frog = elgar::Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    e.joints.push_back({an.bow_pip[i], 1.0 / 6});
    e.joints.push_back({an.bow_dip[i], 1.0 / 6});
    frog += (pose.positions[an.bow_pip[i]] + pose.positions[an.bow_dip[i]]) / 6;
  }
  e.target = frog + offset;
  const std::vector<int> chain{sk.index_of("right_shoulder"), sk.index_of("right_elbow"), sk.index_of("right_wrist")};
  elgar::solve_ik(std::span<double>(frame.data(), frame.size()), sk, chain, e);
}

// |a - n| / max(|a|, |n|, floor)
inline double rel_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// Central difference of f at x(i).
template <class M>
double central_difference(M& x, int r, int c, double h, const std::function<double()>& f) {
  const double keep = x(r, c);
  x(r, c) = keep + h;
  const double up = f();
  x(r, c) = keep - h;
  const double down = f();
  x(r, c) = keep;
  return (up - down) / (2 * h);
}

}  // namespace testing
