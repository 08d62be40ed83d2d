#include <doctest.h>

#include "elgar/error.hpp"
#include "elgar/geometry.hpp"
#include "support.hpp"

using namespace elgar;

namespace {

const ContactIntent* on_string(const std::vector<ContactIntent>& c, int s) {
  for (const auto& x : c)
    if (x.string == s) return &x;
  return nullptr;
}

}  // namespace

TEST_CASE("equal temperament") {
  CHECK(midi_to_hz(69) == doctest::Approx(440.0).epsilon(1e-15));
  CHECK(midi_to_hz(36) == doctest::Approx(65.40639).epsilon(1e-6));
  CHECK(cents_between(440.0 * std::pow(2.0, 1.0 / 12.0), 440.0) == doctest::Approx(100.0));
}

TEST_CASE("shipped cello") {
  const CelloSpec& c = testing::cello();
  const std::array<double, 4> open{65.406391, 97.998859, 146.832384, 220.0};
  for (int s = 0; s < 4; ++s) {
    CHECK(c.strings[s].open_hz == doctest::Approx(open[s]).epsilon(1e-8));
    CHECK(c.strings[s].speaking_length() == doctest::Approx(0.69).epsilon(1e-6));
  }
  CHECK(c.bow_length == 0.71);
  CHECK(c.landmarks.count("endpin") == 1);
}

TEST_CASE("open A is an open candidate") {
  const CelloSpec& c = testing::cello();
  const auto cand = pitch_to_positions(220.0, c);
  const ContactIntent* a = on_string(cand, 3);
  REQUIRE(a);
  CHECK(a->is_open_string);
  CHECK(a->distance_from_nut == 0.0);
  CHECK((a->point - c.strings[3].nut).norm() < 1e-12);
}

TEST_CASE("an octave halves the vibrating length") {
  const CelloSpec& c = testing::cello();
  const auto cand = pitch_to_positions(440.0, c);
  const ContactIntent* a = on_string(cand, 3);
  REQUIRE(a);
  CHECK_FALSE(a->is_open_string);
  CHECK(a->distance_from_nut == doctest::Approx(c.strings[3].speaking_length() / 2).epsilon(1e-12));
  CHECK(a->distance_from_nut == doctest::Approx(0.345).epsilon(1e-6));
}

TEST_CASE("below open C is unplayable") {
  try {
    pitch_to_positions(50.0, testing::cello());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPlayablePosition);
  }
  CHECK_THROWS_AS(pitch_to_positions(220.0 * 3.5, testing::cello()), Error);
}

TEST_CASE("open tolerance band") {
  const CelloSpec& c = testing::cello();
  const double inside = 220.0 * std::pow(2.0, 14.0 / 1200.0);
  const double outside = 220.0 * std::pow(2.0, 16.0 / 1200.0);
  CHECK(on_string(pitch_to_positions(inside, c), 3)->is_open_string);
  CHECK_FALSE(on_string(pitch_to_positions(outside, c), 3)->is_open_string);
}

TEST_CASE("candidates are monotone in pitch and invert exactly") {
  const CelloSpec& c = testing::cello();
  for (int s = 0; s < 4; ++s) {
    const double f_open = c.strings[s].open_hz;
    const double L = c.strings[s].speaking_length();
    double last = -1;
    for (double r = 1.05; r <= 2.95; r += 0.05) {
      const double f0 = f_open * r;
      const auto cand = pitch_to_positions(f0, c);
      const ContactIntent* x = on_string(cand, s);
      REQUIRE(x);
      CHECK(x->distance_from_nut > last);
      last = x->distance_from_nut;
      CHECK(x->distance_from_nut == doctest::Approx(L * (1 - f_open / f0)).epsilon(1e-12));
      CHECK(testing::rel_error(f_open * L / (L - x->distance_from_nut), f0, 0) < 1e-9);
      CHECK(point_segment_distance(x->point, c.strings[s].nut, c.strings[s].bridge).distance < 1e-9);
    }
  }
}

TEST_CASE("select_intent picks the nearest finger-candidate pair") {
  const CelloSpec& c = testing::cello();
  // 293.66 Hz (D4) is playable on the D and A strings
  const double f0 = 293.66;
  const auto cand = pitch_to_positions(f0, c);
  const ContactIntent* d = on_string(cand, 2);
  const ContactIntent* a = on_string(cand, 3);
  REQUIRE(d);
  REQUIRE(a);
  std::array<Vec3, 4> tips{a->point + Vec3(0, 0.05, 0), a->point + Vec3(0, 0.003, 0), a->point + Vec3(0, -0.04, 0),
                           a->point + Vec3(0, -0.08, 0)};
  IntentChoice ch = select_intent(f0, tips, c);
  CHECK(ch.intent.string == 3);
  REQUIRE(ch.note_finger);
  CHECK(*ch.note_finger == 1);
  CHECK(ch.distance == doctest::Approx(0.003).epsilon(1e-9));

  tips[2] = d->point;
  ch = select_intent(f0, tips, c);
  CHECK(ch.intent.string == 2);
  CHECK(*ch.note_finger == 2);
  CHECK(ch.distance < 1e-12);
}

TEST_CASE("open-string match takes precedence") {
  const CelloSpec& c = testing::cello();
  const auto cand = pitch_to_positions(146.832384, c);
  const ContactIntent* g = on_string(cand, 1);
  REQUIRE(g);
  const std::array<Vec3, 4> tips{g->point, g->point, g->point, g->point};
  const IntentChoice ch = select_intent(146.832384, tips, c);
  CHECK(ch.intent.string == 2);
  CHECK(ch.intent.is_open_string);
  CHECK_FALSE(ch.note_finger.has_value());
}

TEST_CASE("activating string") {
  const CelloSpec& c = testing::cello();
  ContactIntent open;
  open.string = 3;
  open.is_open_string = true;
  open.point = c.strings[3].nut;
  Segment s = activating_string(open, c);
  CHECK((s.a - c.strings[3].nut).norm() < 1e-15);
  CHECK((s.b - c.strings[3].bridge).norm() < 1e-15);

  const ContactIntent stopped = *on_string(pitch_to_positions(440.0, c), 3);
  s = activating_string(stopped, c);
  CHECK((s.a - stopped.point).norm() < 1e-15);
  CHECK((s.b - c.strings[3].bridge).norm() < 1e-15);

  ContactIntent low;
  low.string = 0;
  low.point = c.strings[0].point_at(0.1);
  s = activating_string(low, c);
  CHECK((s.b - c.strings[0].bridge).norm() < 1e-15);
}

TEST_CASE("the arched bridge lets a bow touch D alone") {
  const CelloSpec& c = testing::cello();
  const double from_bridge = 0.07;
  const Vec3 contact = c.strings[2].point_at(c.strings[2].speaking_length() - from_bridge);
  const Vec3 dir = arch_bow_direction(c, 2, from_bridge);
  const Vec3 a0 = contact - 0.35 * dir, a1 = contact + 0.35 * dir;
  CHECK(segment_segment_distance(a0, a1, c.strings[2].nut, c.strings[2].bridge).distance < 1e-12);
  CHECK(segment_segment_distance(a0, a1, c.strings[1].nut, c.strings[1].bridge).distance > 1e-4);
  CHECK(segment_segment_distance(a0, a1, c.strings[3].nut, c.strings[3].bridge).distance > 1e-4);
}

TEST_CASE("cello validation") {
  CelloSpec c = testing::cello();
  std::swap(c.strings[0].open_hz, c.strings[1].open_hz);
  CHECK_THROWS_AS(c.validate(), Error);
  c = testing::cello();
  c.strings[1].bridge = 0.5 * (c.strings[0].bridge + c.strings[2].bridge);
  c.strings[3].bridge = c.strings[2].bridge + (c.strings[2].bridge - c.strings[1].bridge);
  CHECK_THROWS_AS(c.validate(), Error);
}
