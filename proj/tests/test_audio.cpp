#include <doctest.h>

#include <filesystem>

#include "elgar/audio.hpp"
#include "elgar/error.hpp"
#include "support.hpp"

using namespace elgar;

namespace {

AudioClip tone(const std::vector<std::pair<double, double>>& parts, bool saw, double amp = 0.5, double sr = 44100) {
  AudioClip c;
  c.sample_rate = sr;
  double phase = 0;
  for (auto [hz, seconds] : parts) {
    const int n = static_cast<int>(std::lround(seconds * sr));
    for (int i = 0; i < n; ++i) {
      c.samples.push_back(saw ? amp * (2 * phase - 1) : amp * std::sin(2 * M_PI * phase));
      phase += hz / sr;
      phase -= std::floor(phase);
    }
  }
  return c;
}

double fraction_within(const std::vector<double>& f0, double hz, double tol) {
  int voiced = 0, good = 0;
  for (double f : f0) {
    if (f <= 0) continue;
    ++voiced;
    good += std::abs(f - hz) <= tol;
  }
  return voiced ? double(good) / voiced : 0.0;
}

}  // namespace

TEST_CASE("sine at 220 Hz") {
  const auto f0 = extract_f0(tone({{220.0, 2.0}}, false), 30.0);
  CHECK(f0.size() == 60u);
  for (double f : f0) CHECK(std::abs(f - 220.0) <= 1.0);
}

TEST_CASE("sawtooth at every open string") {
  for (double hz : {65.406391, 97.998859, 146.832384, 220.0}) {
    const auto f0 = extract_f0(tone({{hz, 1.5}}, true), 30.0);
    CHECK(fraction_within(f0, hz, 1.0) >= 0.95);
    for (double f : f0) CHECK(f < 1.5 * hz);  // never an octave up
  }
}

TEST_CASE("silence is unvoiced") {
  AudioClip c;
  c.samples.assign(44100, 0.0);
  for (double f : extract_f0(c, 30.0)) CHECK(f == 0.0);
  const Matrix feat = build_features(extract_f0(c, 30.0), c, 30.0);
  for (int k = 0; k < feat.rows(); ++k) {
    CHECK(feat(k, 0) == 0.0);
    CHECK(feat(k, 1) == 0.0);
    CHECK(feat(k, 2) < 1e-12);
    CHECK(feat(k, 3) == 0.0);
  }
}

TEST_CASE("octave jump is tracked without octave errors") {
  const auto clip = tone({{110.0, 1.0}, {220.0, 1.0}}, true);
  const auto f0 = extract_f0(clip, 30.0);
  int bad = 0;
  for (int k = 0; k < 60; ++k) {
    const double want = k < 30 ? 110.0 : 220.0;
    if (k >= 29 && k <= 31) {
      // frames straddling the change may drop out but never land on another octave
      bad += f0[k] > 0 && std::abs(f0[k] - 110.0) > 1.0 && std::abs(f0[k] - 220.0) > 1.0;
    } else {
      bad += std::abs(f0[k] - want) > 1.0;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("log-f0 delta spikes only at the jump frame") {
  const auto clip = tone({{110.0, 1.0}, {220.0, 1.0}}, true);
  std::vector<double> f0(60, 110.0);
  std::fill(f0.begin() + 30, f0.end(), 220.0);
  const Matrix feat = build_features(f0, clip, 30.0);
  for (int k = 0; k < 60; ++k) {
    if (k == 30) {
      CHECK(feat(k, 3) == doctest::Approx(1.0 / std::log2(20.0)).epsilon(1e-12));
    } else {
      CHECK(feat(k, 3) == 0.0);
    }
  }
}

TEST_CASE("constant tone features") {
  const auto clip = tone({{220.0, 1.0}}, false, 0.5);
  std::vector<double> f0(30, 220.0);
  const Matrix feat = build_features(f0, clip, 30.0);
  CHECK(feat.rows() == 30);
  CHECK(feat.cols() == kConditionFeatures);
  for (int k = 0; k < 30; ++k) {
    CHECK(feat(k, 0) == doctest::Approx(normalized_log_f0(220.0)));
    CHECK(feat(k, 1) == 1.0);
    // 7.33 periods per frame, so the frame RMS sits within 1% of A/sqrt(2)
    CHECK(feat(k, 2) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-2));
    CHECK(feat(k, 3) == 0.0);
  }
  CHECK(build_features(f0, clip, 30.0) == feat);
}

TEST_CASE("frame count and voicing range") {
  const auto clip = tone({{300.0, 0.5}}, true);
  CHECK(frame_count_for(clip, 30.0) == 15);
  for (double f : extract_f0(clip, 30.0)) {
    if (f > 0) {
      CHECK(f >= 60.0);
      CHECK(f <= 1200.0);
    }
  }
}

TEST_CASE("wav round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "elgar_test_audio";
  std::filesystem::create_directories(dir);
  const auto clip = tone({{220.0, 0.2}}, true, 0.4, 22050);
  write_wav((dir / "f.wav").string(), clip, WavFormat::Float32);
  AudioClip back = read_wav((dir / "f.wav").string());
  CHECK(back.sample_rate == 22050);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) CHECK(back.samples[i] == doctest::Approx(clip.samples[i]).epsilon(1e-6));

  write_wav((dir / "p.wav").string(), clip, WavFormat::Pcm16);
  back = read_wav((dir / "p.wav").string());
  for (size_t i = 0; i < clip.samples.size(); ++i) CHECK(std::abs(back.samples[i] - clip.samples[i]) < 1e-4);
  std::filesystem::remove_all(dir);

  try {
    read_wav((dir / "missing.wav").string());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("clip validation") {
  AudioClip c;
  CHECK_THROWS_AS(c.validate(), Error);
  c.samples.assign(10, 0.0);
  c.sample_rate = 4000;
  CHECK_THROWS_AS(c.validate(), Error);
}
