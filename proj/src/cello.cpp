#include "elgar/cello.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "elgar/error.hpp"

namespace elgar {

Vec3 CelloString::point_at(double distance_from_nut) const {
  return nut + (distance_from_nut / speaking_length()) * (bridge - nut);
}

Vec3 CelloSpec::bridge_center() const {
  Vec3 c = Vec3::Zero();
  for (const auto& s : strings) c += s.bridge;
  return c / kStringCount;
}

void CelloSpec::validate() const {
  for (int i = 0; i < kStringCount; ++i) {
    const auto& s = strings[i];
    if (!s.nut.allFinite() || !s.bridge.allFinite()) raise(ErrorCode::InvalidArgument, "string " + s.name + " is not finite");
    if (!(s.speaking_length() > 0)) raise(ErrorCode::InvalidArgument, "string " + s.name + " has zero speaking length");
    if (!(s.open_hz > 0)) raise(ErrorCode::InvalidArgument, "string " + s.name + " has no open frequency");
    if (i > 0 && !(s.open_hz > strings[i - 1].open_hz)) {
      raise(ErrorCode::InvalidArgument, "open frequencies must increase C < G < D < A");
    }
  }
  if (!(bow_length > 0)) raise(ErrorCode::InvalidArgument, "bow length must be positive");
  if (!(max_ratio > 1)) raise(ErrorCode::InvalidArgument, "max_ratio must exceed 1");
  if (!(open_tolerance_cents >= 0)) raise(ErrorCode::InvalidArgument, "open tolerance must be >= 0");

  // Arch: the bridge crossings may not lie on one line.
  const Vec3 c = bridge_center();
  Eigen::Matrix<double, 4, 3> M;
  for (int i = 0; i < kStringCount; ++i) M.row(i) = (strings[i].bridge - c).transpose();
  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(M);
  const auto sv = svd.singularValues();
  if (sv[1] <= 1e-6 * sv[0]) raise(ErrorCode::InvalidArgument, "bridge points are collinear (no arch)");
}

namespace {

Vec3 vec3_from(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) raise(ErrorCode::ParseError, what + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

CelloSpec cello_from_json_text(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    CelloSpec spec;
    const auto& strings = doc.at("strings");
    if (strings.size() != kStringCount) raise(ErrorCode::ParseError, "cello needs exactly 4 strings");
    for (int i = 0; i < kStringCount; ++i) {
      const auto& s = strings[i];
      spec.strings[i].name = s.at("name").get<std::string>();
      spec.strings[i].nut = vec3_from(s.at("nut"), "nut");
      spec.strings[i].bridge = vec3_from(s.at("bridge"), "bridge");
      spec.strings[i].open_hz = s.at("open_hz").get<double>();
    }
    spec.bow_length = doc.value("bow_length", 0.71);
    spec.endpin = vec3_from(doc.at("endpin"), "endpin");
    spec.max_ratio = doc.value("max_ratio", 3.0);
    spec.open_tolerance_cents = doc.value("open_tolerance_cents", 15.0);
    spec.landmarks["endpin"] = spec.endpin;
    for (const auto& s : spec.strings) {
      spec.landmarks["bridge_" + s.name] = s.bridge;
      spec.landmarks["nut_" + s.name] = s.nut;
    }
    if (doc.contains("landmarks")) {
      for (auto it = doc["landmarks"].begin(); it != doc["landmarks"].end(); ++it)
        spec.landmarks[it.key()] = vec3_from(it.value(), "landmark " + it.key());
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, std::string("cello JSON: ") + e.what());
  }
}

CelloSpec load_cello(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open cello file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return cello_from_json_text(ss.str());
}

double midi_to_hz(double midi) { return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0); }

double cents_between(double f, double reference) { return 1200.0 * std::log2(f / reference); }

std::vector<ContactIntent> pitch_to_positions(double f0, const CelloSpec& cello) {
  if (!(f0 > 0) || !std::isfinite(f0)) raise(ErrorCode::InvalidArgument, "f0 must be positive");
  std::vector<ContactIntent> out;
  for (int i = 0; i < kStringCount; ++i) {
    const CelloString& s = cello.strings[i];
    const double L = s.speaking_length();
    if (std::abs(cents_between(f0, s.open_hz)) <= cello.open_tolerance_cents) {
      out.push_back({i, s.nut, 0.0, true});
    } else if (f0 > s.open_hz && f0 <= s.open_hz * cello.max_ratio) {
      const double d = L * (1.0 - s.open_hz / f0);
      out.push_back({i, s.point_at(d), d, false});
    }
  }
  if (out.empty()) raise(ErrorCode::NoPlayablePosition, "no string can sound " + std::to_string(f0) + " Hz");
  return out;
}

IntentChoice select_intent(double f0, std::span<const Vec3, 4> fingertips, const CelloSpec& cello) {
  const auto candidates = pitch_to_positions(f0, cello);
  for (const auto& c : candidates) {
    if (c.is_open_string) return {c, std::nullopt, 0.0};
  }
  IntentChoice best;
  best.distance = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    for (int k = 0; k < 4; ++k) {
      const double d = (fingertips[k] - c.point).norm();
      if (d < best.distance) best = {c, k, d};
    }
  }
  return best;
}

Segment activating_string(const ContactIntent& intent, const CelloSpec& cello) {
  const CelloString& s = cello.strings.at(intent.string);
  return {intent.is_open_string ? s.nut : intent.point, s.bridge};
}

}  // namespace elgar
