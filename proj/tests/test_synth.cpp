#include <doctest.h>

#include "elgar/condition.hpp"
#include "elgar/error.hpp"
#include "elgar/losses.hpp"
#include "elgar/metrics.hpp"
#include "support.hpp"

using namespace elgar;

TEST_CASE("one open-A note") {
  const std::vector<ScoreNote> score{{220.0, 1.0, 3, std::nullopt}};
  const SynthPerformance p = synth_performance(score, testing::skeleton(), testing::cello());
  const ConditionTrack& c = p.condition;
  CHECK(c.frame_count() == 30);
  CHECK(p.motion.frame_count() == 30);
  for (int k = 0; k < c.frame_count(); ++k) {
    REQUIRE(c.annotations[k]);
    CHECK_FALSE(c.annotations[k]->note_finger);
    CHECK(c.annotations[k]->intent.string == 3);
    CHECK(c.annotations[k]->intent.is_open_string);
  }
  const DistanceMetric bsd = bow_string_distance(p.motion, c.f0, testing::skeleton(), testing::cello());
  CHECK(bsd.mean_mm < 1e-3);
}

TEST_CASE("annotations follow the score") {
  const auto score = random_score(8, 4, testing::cello());
  const SynthPerformance p = synth_performance(score, testing::skeleton(), testing::cello());
  REQUIRE(p.note_start_frames.size() == score.size());
  for (size_t n = 0; n < score.size(); ++n) {
    const int k = p.note_start_frames[n] + 1;
    REQUIRE(p.condition.annotations[k]);
    const auto& a = *p.condition.annotations[k];
    CHECK(a.intent.string == score[n].string);
    CHECK(a.note_finger == score[n].finger);
    CHECK(p.condition.f0[k] == doctest::Approx(score[n].pitch_hz));
  }
}

TEST_CASE("ground truth satisfies the contact losses") {
  const SynthPerformance p = testing::performance(8, 7);
  const auto& sk = testing::skeleton();
  const auto& c = testing::cello();
  CHECK(loss_hicl(p.motion.frames, p.condition, sk, c) < 1e-9);
  CHECK(loss_bicl(p.motion.frames, p.condition, sk, c) < 1e-9);
  const DistanceMetric fcd = finger_contact_distance(p.motion, p.condition.f0, sk, c);
  CHECK(fcd.mean_mm < 1e-6);
}

TEST_CASE("bow rigidity and unit directions in ground truth") {
  const SynthPerformance p = testing::performance(5, 2);
  const auto& sk = testing::skeleton();
  for (int k = 0; k < p.motion.frame_count(); ++k) {
    Eigen::RowVectorXd f = p.motion.frames.row(k);
    const std::span<const double> s(f.data(), f.size());
    CHECK(f.tail<3>().norm() == doctest::Approx(1.0).epsilon(1e-12));
    const BowPose b = frame_bow(s, sk, forward_kinematics(s, sk), testing::cello().bow_length);
    CHECK(std::abs((b.tip - b.frog).norm() - 0.71) < 1e-9);
  }
}

TEST_CASE("pitch tracking recovers the score within 5 cents") {
  const SynthPerformance p = testing::performance(10, 3);
  const auto f0 = extract_f0(p.audio, 30.0);
  REQUIRE(f0.size() == p.condition.f0.size());
  int voiced = 0, good = 0;
  for (size_t k = 0; k < f0.size(); ++k) {
    if (p.condition.f0[k] <= 0) continue;
    ++voiced;
    good += f0[k] > 0 && std::abs(cents_between(f0[k], p.condition.f0[k])) <= 5.0;
  }
  CHECK(double(good) / voiced >= 0.95);
}

TEST_CASE("alternating strings give detectable attacks") {
  std::vector<ScoreNote> score;
  for (int n = 0; n < 8; ++n) {
    const int s = n % 2 ? 3 : 2;
    score.push_back({testing::cello().strings[s].open_hz * std::pow(2.0, 2.0 / 12), 0.6, s, 0});
  }
  const SynthPerformance p = synth_performance(score, testing::skeleton(), testing::cello());
  CHECK(p.attack_frames.size() == 7u);
  const auto found = detect_bowing_attacks(p.motion, testing::skeleton(), testing::cello());
  const F1Score f = bowing_f1(found, p.attack_frames, 3);
  CHECK(f.f1 == 1.0);
}

TEST_CASE("rests are unvoiced and hold the bow") {
  const std::vector<ScoreNote> score{{220.0 * std::pow(2.0, 3 / 12.0), 0.5, 3, 1}, {0.0, 0.5, 0, std::nullopt},
                                     {146.832384, 0.5, 2, std::nullopt}};
  const SynthPerformance p = synth_performance(score, testing::skeleton(), testing::cello());
  int unvoiced = 0;
  for (int k = 0; k < p.condition.frame_count(); ++k) unvoiced += !p.condition.voiced(k);
  CHECK(unvoiced >= 14);
  CHECK(p.attack_frames.size() == 1u);
}

TEST_CASE("synthesis is deterministic") {
  const SynthPerformance a = testing::performance(4, 9);
  const SynthPerformance b = testing::performance(4, 9);
  CHECK(a.motion.frames == b.motion.frames);
  CHECK(a.audio.samples == b.audio.samples);
}

TEST_CASE("unplayable score") {
  const std::vector<ScoreNote> score{{40.0, 0.5, 0, 0}};
  try {
    synth_performance(score, testing::skeleton(), testing::cello());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPlayablePosition);
  }
}

TEST_CASE("IK reaches a target") {
  const auto& sk = testing::skeleton();
  std::mt19937_64 rng(1);
  Eigen::RowVectorXd f = testing::random_frame(rng, 0.2);
  const std::vector<int> chain{sk.index_of("left_shoulder"), sk.index_of("left_elbow"), sk.index_of("left_wrist")};
  const int tip = sk.index_of("left_index_tip");
  const std::span<const double> s(f.data(), f.size());
  const Vec3 start = forward_kinematics(s, sk).positions[tip];
  IkEffector e;
  e.joints = {{tip, 1.0}};
  e.target = start + Vec3(-0.05, -0.05, 0.03);  // inward: the rest arm is fully extended
  const double r = solve_ik(std::span<double>(f.data(), f.size()), sk, chain, e);
  CHECK(r < 1e-9);
  CHECK((forward_kinematics(s, sk).positions[tip] - e.target).norm() < 1e-9);
}
