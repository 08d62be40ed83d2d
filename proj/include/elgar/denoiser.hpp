#pragma once

#include <string>
#include <vector>

#include "elgar/condition.hpp"
#include "elgar/diffusion.hpp"
#include "elgar/losses.hpp"
#include "elgar/tape.hpp"

namespace elgar {

struct DenoiserConfig {
  int blocks = 2;
  int dim = 64;
  int heads = 4;
  int cond_dim = 4;
  int max_frames = 150;
  int feature_dim = kFeatureDim;

  void validate() const;
};

/// Tensors in declaration order:
///   in.w [309 x d], in.b [1 x d]
///   cond.w [D x d], cond.b [1 x d], cond.null [1 x d]
///   time.w1 [d x d], time.b1, time.w2 [d x d], time.b2
///   per block i: ada.w [d x 9d], ada.b [1 x 9d],
///     attn.wqkv [d x 3d], attn.bqkv, attn.wo [d x d], attn.bo,
///     cross.wq [d x d], cross.bq, cross.wkv [d x 2d], cross.bkv, cross.wo [d x d], cross.bo,
///     ffn.w1 [d x 4d], ffn.b1, ffn.w2 [4d x d], ffn.b2
///   final.ada.w [d x 2d], final.ada.b, out.w [d x 309], out.b [1 x 309]
///
/// Parameter count: (4 + 25 B) d^2 + (2 * 309 + D + 7 + 22 B) d + 309.
/// For the default (B = 2, d = 64, D = 4) that is 264565.
/// Per-feature affine map into the space diffusion runs in: z = (x - mean) / scale.  Motion
/// features vary by a few hundredths around large constants, so unit-variance noise would
/// swamp them at almost every t without it.
struct FeatureNormalization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static FeatureNormalization identity(int dim);
  Matrix to_model(const Matrix& x) const;
  Matrix from_model(const Matrix& z) const;
};

/// Mean and standard deviation over every frame of `slices`; scales below `floor` are raised
/// to it so constant features stay finite.
FeatureNormalization feature_statistics(const std::vector<Matrix>& slices, double floor = 1e-3);

struct DenoiserParams {
  DenoiserConfig config;
  std::vector<std::string> names;
  std::vector<Matrix> tensors;
  FeatureNormalization normalization;  ///< fixed statistics, not trained

  long long count() const;
  int index_of(const std::string& name) const;
  Matrix& operator[](const std::string& name) { return tensors[index_of(name)]; }
  const Matrix& operator[](const std::string& name) const { return tensors[index_of(name)]; }
};

long long denoiser_parameter_count(const DenoiserConfig& config);

/// Xavier-uniform linear weights, zero biases, zero adaLN heads (so every gate starts at 0).
DenoiserParams init_denoiser(const DenoiserConfig& config, unsigned long long seed);

/// Sinusoidal embedding of a scalar position: [sin(p w_i), cos(p w_i)], w_i = 10000^(-i/(d/2)).
Eigen::RowVectorXd sinusoidal_embedding(double position, int dim);

/// Optional taps for inspection: every gated residual branch in block order.
struct ForwardProbe {
  std::vector<Matrix> branches;
};

/// x̂₀ for (x_t, t), both in normalized space.  A null `cond` routes through the learned null
/// embedding.
/// Throws ShapeMismatch or NonFiniteActivation.
Matrix denoiser_forward(const DenoiserParams& params, const Matrix& x_t, int t, const Matrix* cond,
                        ForwardProbe* probe = nullptr);

/// Records the forward pass on a tape.  `leaves` receives one tape handle per tensor.
ad::Var denoiser_graph(ad::Tape& tape, const DenoiserParams& params, const Matrix& x_t, int t, const Matrix* cond,
                       bool track_params, std::vector<ad::Var>* leaves, ForwardProbe* probe = nullptr);

/// One training example before noising; x0 is in motion-feature space.
struct TrainItem {
  Matrix x0;
  ConditionTrack condition;  ///< annotated, frame-aligned with x0
  int t = 1;
  Matrix eps;
  bool drop_condition = false;
};

/// Loss of one item and its gradient with respect to every tensor, accumulated (summed) into
/// `grads`, which must match the tensor shapes.  Noise is added to the normalized x0; the losses
/// see the prediction mapped back to motion features.
LossBreakdown denoiser_backward(const DenoiserParams& params, const TrainItem& item, const NoiseSchedule& schedule,
                                const LossWeights& weights, const Skeleton& skeleton, const CelloSpec& cello,
                                std::vector<Matrix>& grads);

std::vector<Matrix> zero_gradients(const DenoiserParams& params);

}  // namespace elgar
