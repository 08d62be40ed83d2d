#include "elgar/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <json.hpp>

#include "elgar/error.hpp"
#include "elgar/geometry.hpp"

namespace elgar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct FrameGeometry {
  Pose pose;
  BowPose bow;
};

FrameGeometry frame_geometry(const MotionSequence& seq, int k, const Skeleton& sk, const CelloSpec& cello) {
  const Eigen::RowVectorXd row = seq.frames.row(k);
  const std::span<const double> frame(row.data(), row.size());
  FrameGeometry g;
  g.pose = forward_kinematics(frame, sk);
  g.bow = frame_bow(frame, sk, g.pose, cello.bow_length);
  return g;
}

std::optional<IntentChoice> intent_at(const FrameGeometry& g, double f0, const Skeleton& sk, const CelloSpec& cello) {
  std::array<Vec3, 4> tips;
  for (int i = 0; i < 4; ++i) tips[i] = g.pose.positions[sk.anchors().fingertips[i]];
  try {
    return select_intent(f0, tips, cello);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoPlayablePosition) return std::nullopt;
    throw;
  }
}

void check_lengths(const MotionSequence& seq, std::span<const double> f0) {
  if (seq.frame_count() != static_cast<int>(f0.size())) {
    raise(ErrorCode::ShapeMismatch, "motion has " + std::to_string(seq.frame_count()) + " frames but the f0 track has " +
                                        std::to_string(f0.size()));
  }
}

void require_voiced(std::span<const double> f0) {
  for (double f : f0)
    if (f > 0) return;
  raise(ErrorCode::NoVoicedFrames, "the f0 track has no voiced frames");
}

DistanceMetric finish(std::vector<double> trace) {
  DistanceMetric m;
  double sum = 0;
  for (double v : trace) {
    if (std::isnan(v)) continue;
    sum += v;
    ++m.frames;
  }
  m.mean_mm = m.frames > 0 ? sum / m.frames : 0.0;
  m.trace_mm = std::move(trace);
  return m;
}

}  // namespace

DistanceMetric finger_contact_distance(const MotionSequence& seq, std::span<const double> f0, const Skeleton& sk,
                                       const CelloSpec& cello) {
  check_lengths(seq, f0);
  require_voiced(f0);
  std::vector<double> trace(f0.size(), kNaN);
  for (int k = 0; k < seq.frame_count(); ++k) {
    if (!(f0[k] > 0)) continue;
    const auto choice = intent_at(frame_geometry(seq, k, sk, cello), f0[k], sk, cello);
    if (!choice || choice->intent.is_open_string) continue;
    trace[k] = 1000.0 * choice->distance;
  }
  return finish(std::move(trace));
}

DistanceMetric bow_string_distance(const MotionSequence& seq, std::span<const double> f0, const Skeleton& sk,
                                   const CelloSpec& cello) {
  check_lengths(seq, f0);
  require_voiced(f0);
  std::vector<double> trace(f0.size(), kNaN);
  for (int k = 0; k < seq.frame_count(); ++k) {
    if (!(f0[k] > 0)) continue;
    const FrameGeometry g = frame_geometry(seq, k, sk, cello);
    const auto choice = intent_at(g, f0[k], sk, cello);
    if (!choice) continue;
    const Segment string = activating_string(choice->intent, cello);
    trace[k] = 1000.0 * segment_segment_distance(g.bow.frog, g.bow.tip, string.a, string.b).distance;
  }
  return finish(std::move(trace));
}

std::vector<double> bow_travel_signal(const MotionSequence& seq, const Skeleton& sk, const CelloSpec& cello) {
  const Vec3 bc = cello.bridge_center();
  std::vector<double> s(seq.frame_count());
  for (int k = 0; k < seq.frame_count(); ++k) {
    const FrameGeometry g = frame_geometry(seq, k, sk, cello);
    s[k] = (g.bow.frog - bc).dot(g.bow.direction);
  }
  return s;
}

std::vector<int> attacks_from_signal(std::span<const double> raw, const AttackDetector& det) {
  const int F = static_cast<int>(raw.size());
  if (F < 3) return {};
  const int half = std::max(det.smoothing, 1) / 2;
  std::vector<double> s(F);
  for (int k = 0; k < F; ++k) {
    const int a = std::max(0, k - half), b = std::min(F - 1, k + half);
    double sum = 0;
    for (int i = a; i <= b; ++i) sum += raw[i];
    s[k] = sum / (b - a + 1);
  }
  std::vector<int> sign(F - 1);
  for (int k = 0; k + 1 < F; ++k) {
    const double d = s[k + 1] - s[k];
    sign[k] = d > 1e-9 ? 1 : (d < -1e-9 ? -1 : 0);
  }
  const int hold = std::max(det.hysteresis, 1);
  auto persists = [&](int k, int sg) {
    int seen = 0;
    for (int i = k; i < F - 1 && seen < hold; ++i) {
      if (sign[i] == 0) continue;
      if (sign[i] != sg) return false;
      ++seen;
    }
    return seen == hold;
  };
  std::vector<int> attacks;
  int dir = 0;
  for (int k = 0; k + 1 < F; ++k) {
    if (sign[k] == 0 || sign[k] == dir) continue;
    if (!persists(k, sign[k])) continue;
    if (dir != 0) attacks.push_back(k);
    dir = sign[k];
  }
  return attacks;
}

std::vector<int> detect_bowing_attacks(const MotionSequence& seq, const Skeleton& sk, const CelloSpec& cello,
                                       const AttackDetector& det) {
  return attacks_from_signal(bow_travel_signal(seq, sk, cello), det);
}

F1Score f1_from_counts(int tp, int predicted, int actual) {
  F1Score f;
  f.true_positives = tp;
  f.predicted = predicted;
  f.actual = actual;
  if (predicted == 0 && actual == 0) {
    f.precision = f.recall = f.f1 = 1.0;
    return f;
  }
  f.precision = predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
  f.recall = actual > 0 ? static_cast<double>(tp) / actual : 0.0;
  f.f1 = f.precision + f.recall > 0 ? 2 * f.precision * f.recall / (f.precision + f.recall) : 0.0;
  return f;
}

F1Score bowing_f1(std::span<const int> pred, std::span<const int> gt, int delta) {
  std::vector<bool> used(gt.size(), false);
  int tp = 0;
  for (int p : pred) {
    for (size_t i = 0; i < gt.size(); ++i) {
      if (used[i] || std::abs(gt[i] - p) > delta) continue;
      used[i] = true;
      ++tp;
      break;
    }
  }
  return f1_from_counts(tp, static_cast<int>(pred.size()), static_cast<int>(gt.size()));
}

double bowing_cosine_similarity(const MotionSequence& gen, const MotionSequence& gt, std::span<const double> f0,
                                const Skeleton& sk, const CelloSpec& cello) {
  check_lengths(gen, f0);
  check_lengths(gt, f0);
  require_voiced(f0);
  auto position = [&](const MotionSequence& seq, int k) -> std::optional<double> {
    const FrameGeometry g = frame_geometry(seq, k, sk, cello);
    const auto choice = intent_at(g, f0[k], sk, cello);
    if (!choice) return std::nullopt;
    const Segment string = activating_string(choice->intent, cello);
    return 2.0 * segment_segment_distance(g.bow.frog, g.bow.tip, string.a, string.b).s - 1.0;
  };
  double dot = 0, na = 0, nb = 0;
  int used = 0;
  for (int k = 0; k < gen.frame_count(); ++k) {
    if (!(f0[k] > 0)) continue;
    const auto a = position(gen, k);
    const auto b = position(gt, k);
    if (!a || !b) continue;
    ++used;
    dot += *a * *b;
    na += *a * *a;
    nb += *b * *b;
  }
  // 1e-9 of a full stroke per frame is below anything a bow can express
  constexpr double kZero = 1e-18;
  if (na <= kZero * used || nb <= kZero * used) raise(ErrorCode::ZeroVector, "bow contact series is identically zero");
  return dot / std::sqrt(na * nb);
}

EvaluationReport evaluate_motion(const MotionSequence& seq, std::span<const double> f0, const Skeleton& sk,
                                 const CelloSpec& cello, const MotionSequence* gt, int delta) {
  EvaluationReport r;
  r.fcd = finger_contact_distance(seq, f0, sk, cello);
  r.bsd = bow_string_distance(seq, f0, sk, cello);
  if (gt) {
    if (gt->frame_count() != seq.frame_count()) {
      raise(ErrorCode::ShapeMismatch, "generated and ground-truth motions differ in length");
    }
    r.predicted_attacks = detect_bowing_attacks(seq, sk, cello);
    r.gt_attacks = detect_bowing_attacks(*gt, sk, cello);
    r.bowing = bowing_f1(r.predicted_attacks, r.gt_attacks, delta);
    r.bcs = bowing_cosine_similarity(seq, *gt, f0, sk, cello);
  }
  return r;
}

EvaluationReport pool_reports(std::span<const EvaluationReport> reports) {
  EvaluationReport out;
  double fcd = 0, bsd = 0, bcs = 0;
  int tp = 0, pred = 0, actual = 0, with_gt = 0;
  for (const auto& r : reports) {
    fcd += r.fcd.mean_mm * r.fcd.frames;
    bsd += r.bsd.mean_mm * r.bsd.frames;
    out.fcd.frames += r.fcd.frames;
    out.bsd.frames += r.bsd.frames;
    if (r.bowing && r.bcs) {
      tp += r.bowing->true_positives;
      pred += r.bowing->predicted;
      actual += r.bowing->actual;
      bcs += *r.bcs;
      ++with_gt;
    }
  }
  out.fcd.mean_mm = out.fcd.frames ? fcd / out.fcd.frames : 0.0;
  out.bsd.mean_mm = out.bsd.frames ? bsd / out.bsd.frames : 0.0;
  if (with_gt > 0 && with_gt == static_cast<int>(reports.size())) {
    out.bowing = f1_from_counts(tp, pred, actual);
    out.bcs = bcs / with_gt;
  }
  return out;
}

std::string report_json(const EvaluationReport& r, bool with_traces) {
  using nlohmann::json;
  auto trace = [](const std::vector<double>& t) {
    json a = json::array();
    for (double v : t) a.push_back(std::isnan(v) ? json(nullptr) : json(v));
    return a;
  };
  json j;
  j["fcd_mm"] = r.fcd.mean_mm;
  j["fcd_frames"] = r.fcd.frames;
  j["bsd_mm"] = r.bsd.mean_mm;
  j["bsd_frames"] = r.bsd.frames;
  if (r.bowing) {
    j["bowing_precision"] = r.bowing->precision;
    j["bowing_recall"] = r.bowing->recall;
    j["bf1"] = r.bowing->f1;
  } else {
    j["bowing_precision"] = nullptr;
    j["bowing_recall"] = nullptr;
    j["bf1"] = nullptr;
  }
  j["bcs"] = r.bcs ? json(*r.bcs) : json(nullptr);
  if (with_traces) {
    j["fcd_trace_mm"] = trace(r.fcd.trace_mm);
    j["bsd_trace_mm"] = trace(r.bsd.trace_mm);
    j["predicted_attacks"] = r.predicted_attacks;
    j["gt_attacks"] = r.gt_attacks;
  }
  return j.dump(2) + "\n";
}

std::string report_table(std::span<const std::pair<std::string, EvaluationReport>> rows) {
  size_t w = 6;
  for (const auto& [name, r] : rows) w = std::max(w, name.size());
  auto pad = [w](const std::string& s) { return s + std::string(w - s.size(), ' '); };
  std::string out = pad("Method") + " | FCD (mm) | BSD (mm) |    BF1 |    BCS\n";
  out += std::string(w, '-') + "-+----------+----------+--------+-------\n";
  char buf[128];
  for (const auto& [name, r] : rows) {
    std::string bf1 = "     -", bcs = "     -";
    if (r.bowing) {
      std::snprintf(buf, sizeof buf, "%6.4f", r.bowing->f1);
      bf1 = buf;
    }
    if (r.bcs) {
      std::snprintf(buf, sizeof buf, "%6.4f", *r.bcs);
      bcs = buf;
    }
    std::snprintf(buf, sizeof buf, " | %8.2f | %8.2f | %s | %s\n", r.fcd.mean_mm, r.bsd.mean_mm, bf1.c_str(), bcs.c_str());
    out += pad(name) + buf;
  }
  return out;
}

}  // namespace elgar
