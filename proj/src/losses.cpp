#include "elgar/losses.hpp"

#include <cmath>

#include "elgar/error.hpp"
#include "elgar/geometry.hpp"

namespace elgar {

namespace {

constexpr double kMinBowNorm = 1e-9;

struct FrameKinematics {
  Pose pose;
  Vec3 v;       // raw bow feature
  double norm;  // clamped |v|
  Vec3 frog;
  Vec3 tip;
  std::vector<Vec3> keypoints;
};

std::span<const double> row_span(const Matrix& m, int r, std::vector<double>& buf) {
  buf.resize(m.cols());
  for (int c = 0; c < m.cols(); ++c) buf[c] = m(r, c);
  return buf;
}

FrameKinematics kinematics(std::span<const double> frame, const Skeleton& sk, double bow_length) {
  FrameKinematics k;
  k.pose = forward_kinematics(frame, sk);
  const SkeletonAnchors& an = sk.anchors();
  k.frog = Vec3::Zero();
  for (int f = 0; f < 3; ++f) k.frog += k.pose.positions[an.bow_pip[f]] + k.pose.positions[an.bow_dip[f]];
  k.frog /= 6.0;
  k.v = Vec3(frame[kRotationFeatures], frame[kRotationFeatures + 1], frame[kRotationFeatures + 2]);
  k.norm = std::max(k.v.norm(), kMinBowNorm);
  k.tip = k.frog + bow_length * k.v / k.norm;
  k.keypoints = k.pose.positions;
  k.keypoints.push_back(k.frog);
  k.keypoints.push_back(k.tip);
  return k;
}

// Pushes keypoint gradients (joints, frog, tip) back into one feature row.
void backprop_frame(std::span<const double> frame, const Skeleton& sk, const FrameKinematics& k,
                    std::vector<Vec3> gkp, double bow_length, Matrix& grad, int row) {
  const int J = sk.joint_count();
  const Vec3 g_tip = gkp[J + 1];
  const Vec3 g_frog = gkp[J] + g_tip;
  gkp.resize(J);
  const SkeletonAnchors& an = sk.anchors();
  for (int f = 0; f < 3; ++f) {
    gkp[an.bow_pip[f]] += g_frog / 6.0;
    gkp[an.bow_dip[f]] += g_frog / 6.0;
  }
  if (!g_tip.isZero(0.0)) {
    const Vec3 d = k.v / k.norm;
    const Vec3 gv = bow_length / k.norm * (g_tip - d * d.dot(g_tip));
    for (int c = 0; c < 3; ++c) grad(row, kRotationFeatures + c) += gv(c);
  }
  std::vector<double> g(kFeatureDim, 0.0);
  forward_kinematics_backward(frame, sk, k.pose, gkp, g);
  for (int c = 0; c < kRotationFeatures; ++c) grad(row, c) += g[c];
}

void check_shapes(const Matrix& pred, const Matrix& target) {
  if (pred.cols() != kFeatureDim || pred.rows() < 1) raise(ErrorCode::ShapeMismatch, "prediction must be F x 309");
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    raise(ErrorCode::ShapeMismatch, "prediction and target shapes differ");
  }
}

const FrameAnnotation& annotation_at(const ConditionTrack& cond, int k) {
  if (!cond.annotated() || !cond.annotations[k]) {
    raise(ErrorCode::MissingAnnotation, "voiced frame " + std::to_string(k) + " has no annotation");
  }
  return *cond.annotations[k];
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {simple, foot, pos, rotvel, posvel, hand, bow}) {
    if (!std::isfinite(w) || w < 0) raise(ErrorCode::InvalidArgument, "loss weights must be finite and >= 0");
  }
}

double loss_total(LossBreakdown& b, const LossWeights& w) {
  b.total = w.simple * b.simple + w.foot * b.foot + w.pos * b.pos + w.rotvel * b.rotvel + w.posvel * b.posvel +
            w.hand * b.hand + w.bow * b.bow;
  return b.total;
}

std::vector<Vec3> loss_keypoints(std::span<const double> frame, const Skeleton& skeleton, double bow_length) {
  return kinematics(frame, skeleton, bow_length).keypoints;
}

LossBreakdown evaluate_losses(const Matrix& pred, const Matrix& target, const LossContext& ctx,
                              const LossWeights& w, Matrix* grad) {
  check_shapes(pred, target);
  w.validate();
  if (!ctx.skeleton || !ctx.cello) raise(ErrorCode::InvalidArgument, "loss context needs a skeleton and a cello");
  const Skeleton& sk = *ctx.skeleton;
  const CelloSpec& cello = *ctx.cello;
  const int F = static_cast<int>(pred.rows());
  const double L = cello.bow_length;
  if (ctx.condition && ctx.condition->frame_count() != F) {
    raise(ErrorCode::ShapeMismatch, "condition and motion frame counts differ");
  }

  LossBreakdown out;
  if (grad) grad->setZero(F, kFeatureDim);

  // simple
  {
    const Matrix diff = pred - target;
    const double n = static_cast<double>(diff.size());
    out.simple = diff.squaredNorm() / n;
    if (grad && w.simple != 0) *grad += (2.0 * w.simple / n) * diff;
  }
  // rotvel
  if (F > 1) {
    const auto dp = pred.leftCols(kRotationFeatures).bottomRows(F - 1) - pred.leftCols(kRotationFeatures).topRows(F - 1);
    const auto dt =
        target.leftCols(kRotationFeatures).bottomRows(F - 1) - target.leftCols(kRotationFeatures).topRows(F - 1);
    const Matrix e = dp - dt;
    const double n = static_cast<double>(e.size());
    out.rotvel = e.squaredNorm() / n;
    if (grad && w.rotvel != 0) {
      const Matrix g = (2.0 * w.rotvel / n) * e;
      grad->leftCols(kRotationFeatures).bottomRows(F - 1) += g;
      grad->leftCols(kRotationFeatures).topRows(F - 1) -= g;
    }
  }

  // Kinematic terms.
  std::vector<double> buf;
  std::vector<FrameKinematics> kp(F), kt(F);
  for (int k = 0; k < F; ++k) {
    kp[k] = kinematics(row_span(pred, k, buf), sk, L);
    kt[k] = kinematics(row_span(target, k, buf), sk, L);
  }
  const int K = static_cast<int>(kp[0].keypoints.size());
  std::vector<std::vector<Vec3>> g(F, std::vector<Vec3>(K, Vec3::Zero()));

  {
    const double n = static_cast<double>(F) * K * 3;
    for (int k = 0; k < F; ++k) {
      for (int i = 0; i < K; ++i) {
        const Vec3 e = kp[k].keypoints[i] - kt[k].keypoints[i];
        out.pos += e.squaredNorm() / n;
        g[k][i] += (2.0 * w.pos / n) * e;
      }
    }
  }
  if (F > 1) {
    const double n = F - 1.0;
    for (int k = 0; k + 1 < F; ++k) {
      for (int i = 0; i < K; ++i) {
        const Vec3 e = (kp[k + 1].keypoints[i] - kp[k].keypoints[i]) - (kt[k + 1].keypoints[i] - kt[k].keypoints[i]);
        out.posvel += e.squaredNorm() / n;
        const Vec3 ge = (2.0 * w.posvel / n) * e;
        g[k + 1][i] += ge;
        g[k][i] -= ge;
      }
    }
    if (ctx.condition && !ctx.condition->foot_contact.empty()) {
      const auto& labels = ctx.condition->foot_contact;
      const auto& feet = sk.anchors().feet;
      for (int k = 0; k + 1 < F; ++k) {
        if (!labels[k]) continue;
        for (int foot : feet) {
          const Vec3 v = kp[k + 1].keypoints[foot] - kp[k].keypoints[foot];
          out.foot += v.squaredNorm() / n;
          const Vec3 gv = (2.0 * w.foot / n) * v;
          g[k + 1][foot] += gv;
          g[k][foot] -= gv;
        }
      }
    }
  }

  if (ctx.condition) {
    const ConditionTrack& cond = *ctx.condition;
    const SkeletonAnchors& an = sk.anchors();
    int voiced = 0;
    for (int k = 0; k < F; ++k) voiced += cond.voiced(k) ? 1 : 0;
    const double inv = voiced > 0 ? 1.0 / voiced : 0.0;
    const int frog_i = K - 2, tip_i = K - 1;
    for (int k = 0; k < F; ++k) {
      if (!cond.voiced(k)) continue;
      const FrameAnnotation& a = annotation_at(cond, k);
      // hand
      for (int f = 0; f < 4; ++f) {
        const Vec3 e = kp[k].keypoints[an.fingertips[f]] - a.intent.point;
        if (a.note_finger && *a.note_finger == f) {
          out.hand += inv * e.squaredNorm();
          g[k][an.fingertips[f]] += (2.0 * w.hand * inv) * e;
        } else {
          const double d = e.norm();
          const double r = d - a.finger_distances[f];
          out.hand += inv * r * r;
          if (d > 0) g[k][an.fingertips[f]] += (2.0 * w.hand * inv * r / d) * e;
        }
      }
      // bow
      const Segment seg = activating_string(a.intent, cello);
      const Vec3& frog = kp[k].keypoints[frog_i];
      const Vec3& tip = kp[k].keypoints[tip_i];
      const SegmentDistance sd = segment_segment_distance(frog, tip, seg.a, seg.b);
      out.bow += inv * sd.distance * sd.distance;
      const Vec3 gpq = (2.0 * w.bow * inv) * (sd.p - sd.q);
      g[k][frog_i] += (1.0 - sd.s) * gpq;
      g[k][tip_i] += sd.s * gpq;
      for (int e = 0; e < 2; ++e) {
        const int idx = e == 0 ? frog_i : tip_i;
        const Vec3& x = kp[k].keypoints[idx];
        const PointSegmentDistance pd = point_segment_distance(x, seg);
        const double r = pd.distance - a.bow_endpoint_distances[e];
        out.bow += inv * r * r;
        if (pd.distance > 0) g[k][idx] += (2.0 * w.bow * inv * r / pd.distance) * (x - pd.q);
      }
    }
  }

  if (grad) {
    for (int k = 0; k < F; ++k) {
      bool any = false;
      for (const Vec3& v : g[k]) any = any || !v.isZero(0.0);
      if (!any) continue;
      backprop_frame(row_span(pred, k, buf), sk, kp[k], g[k], L, *grad, k);
    }
  }
  loss_total(out, w);
  return out;
}

double loss_simple(const Matrix& pred, const Matrix& target, Matrix* grad) {
  check_shapes(pred, target);
  const Matrix diff = pred - target;
  const double n = static_cast<double>(diff.size());
  if (grad) *grad = (2.0 / n) * diff;
  return diff.squaredNorm() / n;
}

GeometricLosses loss_geometric(const Matrix& pred, const Matrix& target, const Skeleton& skeleton,
                               const std::vector<bool>& foot_contact) {
  if (!foot_contact.empty() && static_cast<int>(foot_contact.size()) != pred.rows()) {
    raise(ErrorCode::ShapeMismatch, "foot contact labels do not match the frame count");
  }
  CelloSpec cello;  // only the bow length matters for the keypoints
  ConditionTrack cond;
  cond.f0.assign(pred.rows(), 0.0);
  cond.features.setZero(pred.rows(), 1);
  cond.foot_contact = foot_contact;
  const LossContext ctx{&skeleton, &cello, &cond};
  const LossBreakdown b = evaluate_losses(pred, target, ctx, LossWeights{});
  return {b.pos, b.foot, b.rotvel, b.posvel};
}

namespace {
double contact_only(const Matrix& pred, const ConditionTrack& cond, const Skeleton& sk, const CelloSpec& cello,
                    Matrix* grad, bool hand) {
  LossWeights w{0, 0, 0, 0, 0, hand ? 1.0 : 0.0, hand ? 0.0 : 1.0};
  const LossContext ctx{&sk, &cello, &cond};
  const LossBreakdown b = evaluate_losses(pred, pred, ctx, w, grad);
  return hand ? b.hand : b.bow;
}
}  // namespace

double loss_hicl(const Matrix& pred, const ConditionTrack& cond, const Skeleton& skeleton, const CelloSpec& cello,
                 Matrix* grad) {
  return contact_only(pred, cond, skeleton, cello, grad, true);
}

double loss_bicl(const Matrix& pred, const ConditionTrack& cond, const Skeleton& skeleton, const CelloSpec& cello,
                 Matrix* grad) {
  return contact_only(pred, cond, skeleton, cello, grad, false);
}

}  // namespace elgar
