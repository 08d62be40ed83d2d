#include <doctest.h>

#include "elgar/error.hpp"
#include "elgar/motion.hpp"
#include "support.hpp"

using namespace elgar;

namespace {

Mat3 rot_z(double deg) { return axis_angle_matrix(Vec3(0, 0, deg * M_PI / 180.0)); }

// root -> a (1,0,0) -> b (1,0,0) -> tip (1,0,0, virtual)
Skeleton two_link() {
  return skeleton_from_json_text(R"({
    "joints": [
      {"name": "root", "parent": null, "offset": [0, 0, 0]},
      {"name": "a", "parent": "root", "offset": [1, 0, 0]},
      {"name": "b", "parent": "a", "offset": [1, 0, 0]},
      {"name": "tip", "parent": "b", "offset": [1, 0, 0], "virtual": true}
    ]})");
}

}  // namespace

TEST_CASE("rot6d of identity and a half turn") {
  const Rot6D id = matrix_to_rot6d(Mat3::Identity());
  CHECK(id.a == std::array<double, 6>{1, 0, 0, 0, 1, 0});

  const Mat3 half = axis_angle_matrix(Vec3(M_PI, 0, 0));
  const Rot6D h = matrix_to_rot6d(half);
  const std::array<double, 6> want{1, 0, 0, 0, -1, 0};
  for (int i = 0; i < 6; ++i) CHECK(h.a[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("rot6d round trip on random rotations") {
  std::mt19937_64 rng(17);
  double worst = 0;
  for (int i = 0; i < 2000; ++i) {
    const Mat3 R = testing::random_rotation(rng);
    worst = std::max(worst, (rot6d_to_matrix(matrix_to_rot6d(R)) - R).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("rot6d decode orthonormalizes arbitrary columns") {
  Rot6D r;
  r.a = {2, 0.1, 0, 0.3, 3, 0.2};
  const Mat3 R = rot6d_to_matrix(r);
  CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-12);
  CHECK(R.determinant() == doctest::Approx(1.0));
  CHECK(R.col(0).dot(Vec3(2, 0.1, 0).normalized()) == doctest::Approx(1.0));
}

TEST_CASE("rot6d degenerate and invalid inputs") {
  Rot6D zero;
  zero.a = {0, 0, 0, 0, 1, 0};
  CHECK_THROWS_AS(rot6d_to_matrix(zero), Error);
  Rot6D parallel;
  parallel.a = {1, 0, 0, 2, 0, 0};
  try {
    rot6d_to_matrix(parallel);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRotation);
  }
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1;
  try {
    matrix_to_rot6d(reflect);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotARotation);
  }
}

TEST_CASE("rot6d backward matches finite differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 6> a;
    for (double& x : a) x = n(rng);
    Mat3 G;
    for (int i = 0; i < 9; ++i) G(i / 3, i % 3) = n(rng);
    std::array<double, 6> g{};
    rot6d_to_matrix_backward(a, G, g);
    for (int i = 0; i < 6; ++i) {
      const double h = 1e-6;
      auto ap = a, am = a;
      ap[i] += h;
      am[i] -= h;
      const double fd = ((rot6d_to_matrix(std::span<const double, 6>(ap)) -
                          rot6d_to_matrix(std::span<const double, 6>(am))).cwiseProduct(G)).sum() / (2 * h);
      CHECK(testing::rel_error(g[i], fd) < 1e-6);
    }
  }
}

TEST_CASE("two-link forward kinematics") {
  const Skeleton sk = two_link();
  std::vector<double> frame(12);
  const Rot6D id;
  const Rot6D rz = matrix_to_rot6d(rot_z(90));
  std::copy(rz.a.begin(), rz.a.end(), frame.begin());
  std::copy(id.a.begin(), id.a.end(), frame.begin() + 6);
  const Pose p = forward_kinematics(frame, sk);
  CHECK((p.positions[1] - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((p.positions[2] - Vec3(1, 1, 0)).norm() < 1e-12);
  CHECK((p.positions[3] - Vec3(1, 2, 0)).norm() < 1e-12);
}

TEST_CASE("zero pose places joints at cumulative rest offsets") {
  const Skeleton& sk = testing::skeleton();
  Eigen::RowVectorXd f = Eigen::RowVectorXd::Zero(kFeatureDim);
  for (int s = 0; s < kRotatedJoints; ++s) {
    f(6 * s) = 1;
    f(6 * s + 4) = 1;
  }
  f(kFeatureDim - 3) = 1;
  const Pose p = forward_kinematics(std::span<const double>(f.data(), f.size()), sk);
  for (int i = 0; i < sk.joint_count(); ++i) {
    Vec3 want = sk.root_pose().t;
    for (int j = i; sk.joint(j).parent >= 0; j = sk.joint(j).parent) want += sk.root_pose().R * sk.joint(j).offset;
    CHECK((p.positions[i] - want).norm() < 1e-12);
  }
}

TEST_CASE("FK is invariant to re-encoding the rotations") {
  std::mt19937_64 rng(5);
  const Skeleton& sk = testing::skeleton();
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::RowVectorXd f = testing::random_frame(rng, 3.0);
    // scale and skew the columns; the decoded rotations are unchanged by re-encoding
    Eigen::RowVectorXd g = f;
    const auto R = decode_rotations(std::span<const double>(f.data(), f.size()));
    for (int s = 0; s < kRotatedJoints; ++s) {
      const Rot6D r = matrix_to_rot6d(R[s]);
      for (int i = 0; i < 6; ++i) g(6 * s + i) = r.a[i];
    }
    const Pose a = forward_kinematics(std::span<const double>(f.data(), f.size()), sk);
    const Pose b = forward_kinematics(std::span<const double>(g.data(), g.size()), sk);
    for (int i = 0; i < sk.joint_count(); ++i) CHECK((a.positions[i] - b.positions[i]).norm() < 1e-6);
  }
}

TEST_CASE("FK locality: a joint's rotation moves only its descendants") {
  std::mt19937_64 rng(9);
  const Skeleton& sk = testing::skeleton();
  Eigen::RowVectorXd f = testing::random_frame(rng);
  const Pose base = forward_kinematics(std::span<const double>(f.data(), f.size()), sk);
  for (int slot = 0; slot < kRotatedJoints; slot += 5) {
    Eigen::RowVectorXd g = f;
    const Rot6D r = matrix_to_rot6d(testing::random_rotation(rng));
    for (int i = 0; i < 6; ++i) g(6 * slot + i) = r.a[i];
    const Pose p = forward_kinematics(std::span<const double>(g.data(), g.size()), sk);
    const int joint = sk.rotated_joint(slot);
    for (int i = 0; i < sk.joint_count(); ++i) {
      // a joint's own rotation moves its children, never itself
      const bool may_move = i != joint && sk.is_descendant(i, joint);
      if (!may_move) CHECK((p.positions[i] - base.positions[i]).norm() == 0.0);
    }
  }
}

TEST_CASE("FK backward matches finite differences") {
  std::mt19937_64 rng(11);
  const Skeleton& sk = testing::skeleton();
  Eigen::RowVectorXd f = testing::random_frame(rng);
  std::normal_distribution<double> n;
  std::vector<Vec3> w(sk.joint_count());
  for (auto& v : w) v = Vec3(n(rng), n(rng), n(rng));
  auto objective = [&]() {
    const Pose p = forward_kinematics(std::span<const double>(f.data(), f.size()), sk);
    double s = 0;
    for (int i = 0; i < sk.joint_count(); ++i) s += w[i].dot(p.positions[i]);
    return s;
  };
  const Pose p = forward_kinematics(std::span<const double>(f.data(), f.size()), sk);
  std::vector<double> g(kFeatureDim, 0.0);
  forward_kinematics_backward(std::span<const double>(f.data(), f.size()), sk, p, w, g);
  std::uniform_int_distribution<int> pick(0, kRotationFeatures - 1);
  for (int trial = 0; trial < 60; ++trial) {
    const int c = pick(rng);
    const double fd = testing::central_difference(f, 0, c, 1e-6, objective);
    CHECK(testing::rel_error(g[c], fd, 1e-2) < 1e-6);
  }
}

TEST_CASE("bow endpoints") {
  const Skeleton& sk = testing::skeleton();
  const SkeletonAnchors& an = sk.anchors();
  Pose pose;
  pose.positions.assign(sk.joint_count(), Vec3::Zero());
  BowPose b = bow_endpoints(pose, sk, Vec3(1, 0, 0), 0.71);
  CHECK(b.frog.norm() == 0.0);
  CHECK((b.tip - Vec3(0.71, 0, 0)).norm() < 1e-15);

  for (int i = 0; i < 3; ++i) pose.positions[an.bow_dip[i]] = Vec3(0, 0.02, 0);
  b = bow_endpoints(pose, sk, Vec3(0, 0, 1), 0.71);
  CHECK((b.frog - Vec3(0, 0.01, 0)).norm() < 1e-15);
  CHECK((b.tip - Vec3(0, 0.01, 0.71)).norm() < 1e-15);
  CHECK_FALSE(b.renormalized);

  b = bow_endpoints(pose, sk, Vec3(0, 0, 3), 0.71);
  CHECK(b.renormalized);
  CHECK((b.tip - b.frog).norm() == doctest::Approx(0.71).epsilon(1e-12));
  CHECK_THROWS_AS(bow_endpoints(pose, sk, Vec3::Zero(), 0.71), Error);
}

TEST_CASE("bow rigidity over random frames") {
  std::mt19937_64 rng(21);
  const Skeleton& sk = testing::skeleton();
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::RowVectorXd f = testing::random_frame(rng);
    f.tail<3>() *= 1.7;
    const std::span<const double> s(f.data(), f.size());
    const BowPose b = frame_bow(s, sk, forward_kinematics(s, sk), 0.71);
    CHECK(std::abs((b.tip - b.frog).norm() - 0.71) < 1e-9);
  }
}

TEST_CASE("skeleton without bow anchors reports MissingAnchorJoints") {
  const Skeleton sk = two_link();
  Pose pose;
  pose.positions.assign(sk.joint_count(), Vec3::Zero());
  try {
    bow_endpoints(pose, sk, Vec3(1, 0, 0), 0.71);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingAnchorJoints);
  }
}

TEST_CASE("flatten and unflatten are lossless") {
  std::mt19937_64 rng(2);
  MotionSequence m;
  m.frames.resize(7, kFeatureDim);
  for (int k = 0; k < 7; ++k) m.frames.row(k) = testing::random_frame(rng);
  const auto flat = flatten(m);
  CHECK(flat.size() == 7u * kFeatureDim);
  const MotionSequence back = unflatten(flat, 7, m.fps);
  CHECK(back.frames == m.frames);
  CHECK(back.fps == m.fps);
}

TEST_CASE("motion validation") {
  MotionSequence m;
  m.frames = Matrix::Zero(2, 10);
  CHECK_THROWS_AS(m.validate(), Error);
  m.frames = Matrix::Zero(0, kFeatureDim);
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("renormalizing bow directions") {
  std::mt19937_64 rng(4);
  MotionSequence m;
  m.frames.resize(3, kFeatureDim);
  for (int k = 0; k < 3; ++k) {
    m.frames.row(k) = testing::random_frame(rng);
    m.frames.row(k).tail<3>() *= (k + 2);
  }
  renormalize_bow_directions(m);
  for (int k = 0; k < 3; ++k) CHECK(m.frames.row(k).tail<3>().norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("shipped skeleton layout") {
  const Skeleton& sk = testing::skeleton();
  int rotated = 0;
  for (const auto& j : sk.joints()) rotated += j.rotated;
  CHECK(rotated == kRotatedJoints);
  CHECK(sk.slot_of(0) == -1);
  for (int s = 0; s < kRotatedJoints; ++s) CHECK(sk.slot_of(sk.rotated_joint(s)) == s);
}
