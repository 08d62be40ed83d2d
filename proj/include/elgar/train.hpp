#pragma once

#include <functional>
#include <vector>

#include "elgar/denoiser.hpp"

namespace elgar {

struct TrainSample {
  Matrix x0;                 ///< slice_frames x 309
  ConditionTrack condition;  ///< annotated, same length
};

/// Windows of `frames` frames every `stride` frames; the last window is padded with the final
/// frame when the take ends early.  Takes shorter than `frames` yield one padded window.
std::vector<TrainSample> make_slices(const MotionSequence& motion, const ConditionTrack& condition, int frames,
                                     int stride);

struct AdamSettings {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainSettings {
  int steps = 1000;
  int batch = 4;
  AdamSettings adam;
  double cond_dropout = 0.10;
  int checkpoint_every = 0;  ///< 0 = only at the end
  unsigned long long seed = 0;
  int threads = 0;  ///< 0 = ELGAR_THREADS or hardware concurrency
};

struct TrainLogRow {
  int step = 0;
  LossBreakdown loss;  ///< batch mean
};

/// Worker count: `requested` if positive, else hardware concurrency, both capped by ELGAR_THREADS.
int resolve_threads(int requested);

class Adam {
 public:
  Adam(const DenoiserParams& params, AdamSettings settings);
  void step(DenoiserParams& params, const std::vector<Matrix>& grads);

 private:
  AdamSettings s_;
  std::vector<Matrix> m_, v_;
  long long t_ = 0;
};

/// Mean-reduced batch gradient: items are evaluated (possibly in parallel) and summed in item
/// order, then divided by the batch size.
LossBreakdown batch_gradient(const DenoiserParams& params, const std::vector<TrainItem>& items,
                             const NoiseSchedule& schedule, const LossWeights& weights, const Skeleton& skeleton,
                             const CelloSpec& cello, std::vector<Matrix>& grads, int threads);

using CheckpointFn = std::function<void(const DenoiserParams&, int step)>;

/// Adam on the weighted loss total with per-item condition dropout.  On a non-finite loss or
/// gradient the last good parameters are handed to `checkpoint` and NonFiniteActivation is
/// raised.
DenoiserParams train_denoiser(const std::vector<TrainSample>& data, DenoiserParams params,
                              const NoiseSchedule& schedule, const LossWeights& weights, const Skeleton& skeleton,
                              const CelloSpec& cello, const TrainSettings& settings, std::vector<TrainLogRow>* log,
                              const CheckpointFn& checkpoint = {});

}  // namespace elgar
