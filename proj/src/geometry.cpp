#include "elgar/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "elgar/error.hpp"

namespace elgar {

namespace {

double weight_at(std::span<const double> w, size_t i) { return w.empty() ? 1.0 : w[i]; }

void check_inputs(std::span<const Vec3> P, std::span<const Vec3> Q, std::span<const double> w) {
  if (P.size() != Q.size()) raise(ErrorCode::ShapeMismatch, "point sets differ in size");
  if (!w.empty() && w.size() != P.size()) raise(ErrorCode::ShapeMismatch, "weights differ in size from points");
  for (size_t i = 0; i < w.size(); ++i)
    if (!(w[i] >= 0) || !std::isfinite(w[i])) raise(ErrorCode::InvalidArgument, "weights must be finite and >= 0");
}

// Rank test on a (weighted) scatter matrix: the two largest singular values must be well separated from 0.
void require_spread(const Mat3& scatter, const char* which) {
  Eigen::JacobiSVD<Mat3> svd(scatter);
  const auto s = svd.singularValues();
  if (!(s[0] > 1e-18) || s[1] <= 1e-10 * s[0]) {
    raise(ErrorCode::DegenerateConfiguration, std::string(which) + " points are coincident or collinear");
  }
}

Mat3 rotation_from_covariance(const Mat3& H) {
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  Mat3 D = Mat3::Identity();
  D(2, 2) = (V * U.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return V * D * U.transpose();
}

}  // namespace

KabschResult kabsch(std::span<const Vec3> P, std::span<const Vec3> Q, std::span<const double> weights) {
  check_inputs(P, Q, weights);
  if (P.size() < 3) raise(ErrorCode::DegenerateConfiguration, "need at least 3 point pairs");
  double wsum = 0;
  Vec3 cp = Vec3::Zero(), cq = Vec3::Zero();
  for (size_t i = 0; i < P.size(); ++i) {
    const double w = weight_at(weights, i);
    wsum += w;
    cp += w * P[i];
    cq += w * Q[i];
  }
  if (!(wsum > 0)) raise(ErrorCode::DegenerateConfiguration, "weights sum to zero");
  cp /= wsum;
  cq /= wsum;
  Mat3 H = Mat3::Zero(), SP = Mat3::Zero(), SQ = Mat3::Zero();
  for (size_t i = 0; i < P.size(); ++i) {
    const double w = weight_at(weights, i);
    const Vec3 p = P[i] - cp, q = Q[i] - cq;
    H += w * p * q.transpose();
    SP += w * p * p.transpose();
    SQ += w * q * q.transpose();
  }
  require_spread(SP, "source");
  require_spread(SQ, "target");
  KabschResult out;
  out.transform.R = rotation_from_covariance(H);
  out.transform.t = cq - out.transform.R * cp;
  out.rmsd = rmsd(P, Q, out.transform, weights);
  return out;
}

Mat3 kabsch_rotation(std::span<const Vec3> P, std::span<const Vec3> Q, std::span<const double> weights) {
  check_inputs(P, Q, weights);
  Mat3 H = Mat3::Zero(), SP = Mat3::Zero(), SQ = Mat3::Zero();
  for (size_t i = 0; i < P.size(); ++i) {
    const double w = weight_at(weights, i);
    H += w * P[i] * Q[i].transpose();
    SP += w * P[i] * P[i].transpose();
    SQ += w * Q[i] * Q[i].transpose();
  }
  require_spread(SP, "source");
  require_spread(SQ, "target");
  return rotation_from_covariance(H);
}

double rmsd(std::span<const Vec3> P, std::span<const Vec3> Q, const RigidTransform& T, std::span<const double> weights) {
  check_inputs(P, Q, weights);
  double acc = 0, wsum = 0;
  for (size_t i = 0; i < P.size(); ++i) {
    const double w = weight_at(weights, i);
    acc += w * (T.apply(P[i]) - Q[i]).squaredNorm();
    wsum += w;
  }
  return wsum > 0 ? std::sqrt(acc / wsum) : 0.0;
}

// ---------------------------------------------------------------------------

PointSegmentDistance point_segment_distance(const Vec3& p, const Vec3& b0, const Vec3& b1) {
  const Vec3 d = b1 - b0;
  const double len2 = d.squaredNorm();
  if (!(len2 > 0)) raise(ErrorCode::ZeroLengthSegment, "segment has zero length");
  PointSegmentDistance out;
  out.u = std::clamp((p - b0).dot(d) / len2, 0.0, 1.0);
  out.q = b0 + out.u * d;
  out.distance = (p - out.q).norm();
  return out;
}

SegmentDistance segment_segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
  const Vec3 da = a1 - a0;
  const Vec3 db = b1 - b0;
  const double a = da.squaredNorm();
  const double c = db.squaredNorm();
  if (!(a > 0) || !(c > 0)) raise(ErrorCode::ZeroLengthSegment, "segment has zero length");
  const Vec3 r = a0 - b0;
  const double b = da.dot(db);
  const double d = da.dot(r);
  const double e = db.dot(r);
  const double denom = a * c - b * b;

  // Interior stationary point of the convex quadratic, when it lies in the unit square.
  if (denom > 1e-14 * a * c) {
    const double s = (b * e - c * d) / denom;
    const double u = (a * e - b * d) / denom;
    if (s >= 0 && s <= 1 && u >= 0 && u <= 1) {
      SegmentDistance out;
      out.s = s;
      out.u = u;
      out.p = a0 + s * da;
      out.q = b0 + u * db;
      out.distance = (out.p - out.q).norm();
      return out;
    }
  }

  // Otherwise the minimum sits on an edge of the parameter square.
  SegmentDistance best;
  best.distance = std::numeric_limits<double>::infinity();
  auto consider = [&](double s, double u) {
    const Vec3 p = a0 + s * da;
    const Vec3 q = b0 + u * db;
    const double dist = (p - q).norm();
    if (dist < best.distance) best = {dist, s, u, p, q};
  };
  for (double s : {0.0, 1.0}) consider(s, point_segment_distance(a0 + s * da, b0, b1).u);
  for (double u : {0.0, 1.0}) consider(point_segment_distance(b0 + u * db, a0, a1).u, u);
  return best;
}

// ---------------------------------------------------------------------------

void require_landmarks(const RawTake& raw, const CelloSpec& shared_cello) {
  for (size_t f = 0; f < raw.frames.size(); ++f) {
    for (const auto& [name, _] : shared_cello.landmarks) {
      auto it = raw.frames[f].find(name);
      if (it == raw.frames[f].end()) {
        raise(ErrorCode::DegenerateConfiguration, "frame " + std::to_string(f) + " lacks cello landmark '" + name + "'");
      }
      if (!it->second.allFinite()) {
        raise(ErrorCode::DegenerateConfiguration, "frame " + std::to_string(f) + " landmark '" + name + "' is not finite");
      }
    }
  }
}

NormalizedTake normalize_take(const RawTake& raw, const CelloSpec& shared_cello) {
  if (!shared_cello.landmarks.count("endpin")) raise(ErrorCode::InvalidArgument, "cello has no endpin landmark");
  require_landmarks(raw, shared_cello);
  const Vec3 shared_endpin = shared_cello.landmarks.at("endpin");

  NormalizedTake out;
  out.fps = raw.fps;
  out.frames.resize(raw.frames.size());
  out.transforms.resize(raw.frames.size());
  out.rmsd.resize(raw.frames.size());

  for (size_t f = 0; f < raw.frames.size(); ++f) {
    const KeypointFrame& in = raw.frames[f];
    const Vec3 endpin = in.at("endpin");
    std::vector<Vec3> P, Q;
    for (const auto& [name, target] : shared_cello.landmarks) {
      if (name == "endpin") continue;
      P.push_back(in.at(name) - endpin);
      Q.push_back(target - shared_endpin);
    }
    Mat3 R;
    try {
      R = kabsch_rotation(P, Q);
    } catch (const Error& e) {
      raise(ErrorCode::DegenerateConfiguration, "frame " + std::to_string(f) + ": " + e.what());
    }
    RigidTransform T{R, shared_endpin - R * endpin};
    out.transforms[f] = T;

    double acc = 0;
    int n = 0;
    for (const auto& [name, target] : shared_cello.landmarks) {
      acc += (T.apply(in.at(name)) - target).squaredNorm();
      ++n;
    }
    out.rmsd[f] = std::sqrt(acc / n);

    KeypointFrame& dst = out.frames[f];
    for (const auto& [name, p] : in) {
      if (is_local_key(name)) {
        dst[name] = p;
      } else if (is_direction_key(name)) {
        dst[name] = R * p;
      } else {
        dst[name] = T.apply(p);
      }
    }
  }
  return out;
}

}  // namespace elgar
