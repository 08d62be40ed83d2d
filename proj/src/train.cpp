#include "elgar/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <random>
#include <thread>

#include "elgar/error.hpp"

namespace elgar {

std::vector<TrainSample> make_slices(const MotionSequence& motion, const ConditionTrack& condition, int frames,
                                     int stride) {
  if (frames < 1 || stride < 1) raise(ErrorCode::InvalidArgument, "slice length and stride must be positive");
  if (motion.frame_count() != condition.frame_count()) {
    raise(ErrorCode::ShapeMismatch, "motion and condition frame counts differ");
  }
  const int F = motion.frame_count();
  std::vector<TrainSample> out;
  for (int begin = 0;; begin += stride) {
    TrainSample s;
    s.x0.resize(frames, motion.frames.cols());
    for (int k = 0; k < frames; ++k) s.x0.row(k) = motion.frames.row(std::min(begin + k, F - 1));
    s.condition = slice(condition, begin, frames);
    out.push_back(std::move(s));
    if (begin + frames >= F) break;
  }
  return out;
}

int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ELGAR_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

Adam::Adam(const DenoiserParams& params, AdamSettings settings) : s_(settings) {
  m_ = zero_gradients(params);
  v_ = zero_gradients(params);
}

void Adam::step(DenoiserParams& params, const std::vector<Matrix>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < grads.size(); ++i) {
    m_[i] = s_.beta1 * m_[i] + (1.0 - s_.beta1) * grads[i];
    v_[i] = s_.beta2 * v_[i] + (1.0 - s_.beta2) * grads[i].cwiseAbs2();
    params.tensors[i].array() -= s_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + s_.eps);
  }
}

LossBreakdown batch_gradient(const DenoiserParams& params, const std::vector<TrainItem>& items,
                             const NoiseSchedule& schedule, const LossWeights& weights, const Skeleton& skeleton,
                             const CelloSpec& cello, std::vector<Matrix>& grads, int threads) {
  const int n = static_cast<int>(items.size());
  if (n == 0) raise(ErrorCode::InvalidArgument, "empty batch");
  std::vector<std::vector<Matrix>> per(n);
  std::vector<LossBreakdown> losses(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](int i) {
    try {
      per[i] = zero_gradients(params);
      losses[i] = denoiser_backward(params, items[i], schedule, weights, skeleton, cello, per[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const int workers = std::min(std::max(threads, 1), n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += workers) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  grads = zero_gradients(params);
  LossBreakdown mean;
  for (int i = 0; i < n; ++i) {
    for (size_t j = 0; j < grads.size(); ++j) grads[j] += per[i][j];
    mean.simple += losses[i].simple;
    mean.foot += losses[i].foot;
    mean.pos += losses[i].pos;
    mean.rotvel += losses[i].rotvel;
    mean.posvel += losses[i].posvel;
    mean.hand += losses[i].hand;
    mean.bow += losses[i].bow;
  }
  for (auto& g : grads) g /= n;
  for (double* v : {&mean.simple, &mean.foot, &mean.pos, &mean.rotvel, &mean.posvel, &mean.hand, &mean.bow}) *v /= n;
  loss_total(mean, weights);
  return mean;
}

DenoiserParams train_denoiser(const std::vector<TrainSample>& data, DenoiserParams params,
                              const NoiseSchedule& schedule, const LossWeights& weights, const Skeleton& skeleton,
                              const CelloSpec& cello, const TrainSettings& s, std::vector<TrainLogRow>* log,
                              const CheckpointFn& checkpoint) {
  if (data.empty()) raise(ErrorCode::InvalidArgument, "training set is empty");
  if (s.steps < 0 || s.batch < 1) raise(ErrorCode::InvalidArgument, "bad training settings");
  weights.validate();
  const int threads = resolve_threads(s.threads);
  std::mt19937_64 rng(s.seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(data.size()) - 1);
  std::uniform_int_distribution<int> pick_t(1, schedule.T);
  Adam adam(params, s.adam);
  std::vector<Matrix> grads;
  for (int step = 1; step <= s.steps; ++step) {
    std::vector<TrainItem> items(s.batch);
    for (auto& it : items) {
      const TrainSample& sample = data[pick(rng)];
      it.x0 = sample.x0;
      it.condition = sample.condition;
      it.t = pick_t(rng);
      it.eps = standard_normal(static_cast<int>(sample.x0.rows()), static_cast<int>(sample.x0.cols()), rng);
      it.drop_condition = draw_condition_dropout(rng, s.cond_dropout);
    }
    LossBreakdown loss;
    try {
      loss = batch_gradient(params, items, schedule, weights, skeleton, cello, grads, threads);
      bool finite = std::isfinite(loss.total);
      for (const auto& g : grads) finite = finite && g.allFinite();
      if (!finite) raise(ErrorCode::NonFiniteActivation, "non-finite loss or gradient at step " + std::to_string(step));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFiniteActivation && checkpoint) checkpoint(params, step - 1);
      throw;
    }
    adam.step(params, grads);
    if (log) log->push_back({step, loss});
    if (checkpoint && s.checkpoint_every > 0 && step % s.checkpoint_every == 0 && step != s.steps) {
      checkpoint(params, step);
    }
  }
  if (checkpoint) checkpoint(params, s.steps);
  return params;
}

}  // namespace elgar
