#pragma once

#include <optional>

#include "elgar/cello.hpp"
#include "elgar/condition.hpp"
#include "elgar/motion.hpp"

namespace elgar {

struct LossWeights {
  double simple = 1.0;
  double foot = 1.0;
  double pos = 1.0;
  double rotvel = 1.0;
  double posvel = 1.0;
  double hand = 10.0;
  double bow = 10.0;

  void validate() const;
};

struct LossBreakdown {
  double simple = 0.0;
  double foot = 0.0;
  double pos = 0.0;
  double rotvel = 0.0;
  double posvel = 0.0;
  double hand = 0.0;
  double bow = 0.0;
  double total = 0.0;
};

/// Weighted sum of the components; fills and returns `total`.
double loss_total(LossBreakdown& b, const LossWeights& w);

/// Everything the losses need besides the two motions.
struct LossContext {
  const Skeleton* skeleton = nullptr;
  const CelloSpec* cello = nullptr;
  const ConditionTrack* condition = nullptr;  ///< annotations, foot labels, f0
};

/// All seven components on x̂₀ (`pred`) against x₀ (`target`), both F x 309.  When `grad` is
/// non-null it receives d(total)/d(pred) under `weights`; components with zero weight are
/// still reported but contribute nothing to the gradient.
///
/// Conventions (meters, per frame k, voiced frames V):
///   simple  mean of squared feature differences
///   pos     mean of squared keypoint coordinate differences; keypoints are every skeleton
///           joint plus the bow frog and tip
///   posvel  1/(F-1) sum_k |dK_pred(k) - dK_gt(k)|^2 summed over keypoints
///   rotvel  mean of squared differences of the 306 rotation-feature frame deltas
///   foot    1/(F-1) sum_k c_k sum_feet |p(k+1) - p(k)|^2 with GT contact labels c_k
///   hand    1/|V| sum_V [ note finger: d^2 ; other fingers: (d - d_gt)^2 ]
///   bow     1/|V| sum_V [ seg(bow, string)^2 + sum_{frog,tip} (d - d_gt)^2 ]
LossBreakdown evaluate_losses(const Matrix& pred, const Matrix& target, const LossContext& ctx,
                              const LossWeights& weights, Matrix* grad = nullptr);

double loss_simple(const Matrix& pred, const Matrix& target, Matrix* grad = nullptr);

struct GeometricLosses {
  double pos = 0.0;
  double foot = 0.0;
  double rotvel = 0.0;
  double posvel = 0.0;
};
GeometricLosses loss_geometric(const Matrix& pred, const Matrix& target, const Skeleton& skeleton,
                               const std::vector<bool>& foot_contact);

double loss_hicl(const Matrix& pred, const ConditionTrack& cond, const Skeleton& skeleton, const CelloSpec& cello,
                 Matrix* grad = nullptr);
double loss_bicl(const Matrix& pred, const ConditionTrack& cond, const Skeleton& skeleton, const CelloSpec& cello,
                 Matrix* grad = nullptr);

/// Keypoints used by the position losses: every skeleton joint, then frog, then tip.
std::vector<Vec3> loss_keypoints(std::span<const double> frame, const Skeleton& skeleton, double bow_length);

}  // namespace elgar
