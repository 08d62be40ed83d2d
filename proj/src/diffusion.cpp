#include "elgar/diffusion.hpp"

#include <cmath>
#include <numbers>

#include "elgar/error.hpp"

namespace elgar {

NoiseSchedule cosine_schedule(int T, double s, double max_beta) {
  if (T < 2) raise(ErrorCode::InvalidArgument, "schedule needs T >= 2");
  auto f = [&](double t) {
    const double c = std::cos((t / T + s) / (1.0 + s) * std::numbers::pi / 2.0);
    return c * c;
  };
  NoiseSchedule sc;
  sc.T = T;
  sc.beta.assign(T + 1, 0.0);
  sc.alpha.assign(T + 1, 1.0);
  sc.alpha_bar.assign(T + 1, 1.0);
  const double f0 = f(0);
  for (int t = 1; t <= T; ++t) {
    sc.beta[t] = std::min(1.0 - (f(t) / f0) / (f(t - 1) / f0), max_beta);
    sc.alpha[t] = 1.0 - sc.beta[t];
    sc.alpha_bar[t] = sc.alpha_bar[t - 1] * sc.alpha[t];
  }
  return sc;
}

Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& schedule) {
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols()) raise(ErrorCode::ShapeMismatch, "noise shape differs from x0");
  if (t < 0 || t > schedule.T) raise(ErrorCode::InvalidArgument, "timestep out of range");
  const double ab = schedule.alpha_bar[t];
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Matrix cfg_combine(const Matrix& out_cond, const Matrix& out_uncond, double w) {
  if (out_cond.rows() != out_uncond.rows() || out_cond.cols() != out_uncond.cols()) {
    raise(ErrorCode::ShapeMismatch, "guidance inputs differ in shape");
  }
  return (1.0 + w) * out_cond - w * out_uncond;
}

X0Model guided_model(std::function<Matrix(const Matrix&, int, bool)> model, double w) {
  return [model = std::move(model), w](const Matrix& x, int t) {
    if (w == 0.0) return model(x, t, true);
    return cfg_combine(model(x, t, true), model(x, t, false), w);
  };
}

namespace {
Matrix call_model(const X0Model& model, const Matrix& x, int t) {
  Matrix out = model(x, t);
  if (out.rows() != x.rows() || out.cols() != x.cols()) raise(ErrorCode::ModelFailure, "model output has the wrong shape");
  if (!out.allFinite()) raise(ErrorCode::ModelFailure, "model output is not finite at t = " + std::to_string(t));
  return out;
}
}  // namespace

std::vector<int> ddim_timesteps(int T, int steps) {
  if (steps < 1 || steps > T) raise(ErrorCode::InvalidArgument, "DDIM steps must lie in [1, T]");
  std::vector<int> ts;
  if (steps == 1) return {T};
  for (int i = 0; i < steps; ++i) {
    const double x = T - static_cast<double>(T - 1) * i / (steps - 1);
    const int t = static_cast<int>(std::lround(x));
    if (ts.empty() || t < ts.back()) ts.push_back(t);
  }
  return ts;
}

Matrix ddim_sample_from(const X0Model& model, Matrix x, const NoiseSchedule& schedule, int steps) {
  const std::vector<int> ts = ddim_timesteps(schedule.T, steps);
  Matrix x0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const int t = ts[i];
    const int next = i + 1 < ts.size() ? ts[i + 1] : 0;
    x0 = call_model(model, x, t);
    const double ab = schedule.alpha_bar[t];
    const double ab_next = schedule.alpha_bar[next];
    const Matrix eps = (x - std::sqrt(ab) * x0) / std::sqrt(1.0 - ab);
    x = std::sqrt(ab_next) * x0 + std::sqrt(1.0 - ab_next) * eps;
  }
  return x0;
}

Matrix standard_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

Matrix ddim_sample(const X0Model& model, int frames, int dim, const NoiseSchedule& schedule, int steps,
                   unsigned long long seed) {
  std::mt19937_64 rng(seed);
  return ddim_sample_from(model, standard_normal(frames, dim, rng), schedule, steps);
}

PosteriorCoefficients posterior_coefficients(const NoiseSchedule& sc, int t) {
  if (t < 1 || t > sc.T) raise(ErrorCode::InvalidArgument, "timestep out of range");
  const double ab = sc.alpha_bar[t], ab_prev = sc.alpha_bar[t - 1];
  PosteriorCoefficients c;
  c.x0 = std::sqrt(ab_prev) * sc.beta[t] / (1.0 - ab);
  c.xt = std::sqrt(sc.alpha[t]) * (1.0 - ab_prev) / (1.0 - ab);
  c.variance = sc.beta[t] * (1.0 - ab_prev) / (1.0 - ab);
  return c;
}

Matrix ddpm_step(const X0Model& model, const Matrix& x_t, int t, const NoiseSchedule& schedule, const Matrix& noise) {
  const PosteriorCoefficients c = posterior_coefficients(schedule, t);
  Matrix out = c.x0 * call_model(model, x_t, t) + c.xt * x_t;
  if (t > 1) {
    if (noise.rows() != x_t.rows() || noise.cols() != x_t.cols()) raise(ErrorCode::ShapeMismatch, "noise shape");
    out += std::sqrt(c.variance) * noise;
  }
  return out;
}

MotionSequence stitch_long_form(std::span<const MotionSequence> segments, double overlap_s) {
  if (segments.empty()) raise(ErrorCode::InvalidArgument, "nothing to stitch");
  const double fps = segments[0].fps;
  const int n = static_cast<int>(std::lround(overlap_s * fps));
  MotionSequence out = segments[0];
  for (size_t i = 1; i < segments.size(); ++i) {
    const MotionSequence& next = segments[i];
    if (next.fps != fps) raise(ErrorCode::FpsMismatch, "segments have different frame rates");
    if (next.frames.cols() != out.frames.cols()) raise(ErrorCode::ShapeMismatch, "segments differ in feature dim");
    if (n < 2 || n > out.frame_count() || n > next.frame_count()) {
      raise(ErrorCode::BadOverlap, "overlap of " + std::to_string(n) + " frames does not fit the segments");
    }
    const int keep = out.frame_count() - n;
    Matrix merged(keep + next.frame_count(), out.frames.cols());
    merged.topRows(keep) = out.frames.topRows(keep);
    for (int k = 0; k < n; ++k) {
      const double w = 1.0 - static_cast<double>(k) / (n - 1);
      merged.row(keep + k) = w * out.frames.row(keep + k) + (1.0 - w) * next.frames.row(k);
    }
    merged.bottomRows(next.frame_count() - n) = next.frames.bottomRows(next.frame_count() - n);
    out.frames = std::move(merged);
  }
  return out;
}

bool draw_condition_dropout(std::mt19937_64& rng, double p) {
  if (!(p >= 0 && p <= 1)) raise(ErrorCode::InvalidArgument, "dropout probability must lie in [0, 1]");
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace elgar
