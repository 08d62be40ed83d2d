#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "elgar/motion.hpp"

namespace elgar {

/// Index t runs 0..T; entry 0 is the clean signal (alpha_bar = 1, beta = 0).
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
};

/// alpha_bar_t = f(t)/f(0) with f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2); beta clipped at max_beta.
NoiseSchedule cosine_schedule(int T = 1000, double s = 0.008, double max_beta = 0.999);

struct GuidanceConfig {
  double w = 1.0;
  double cond_dropout = 0.10;
};

/// sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
Matrix q_sample(const Matrix& x0, int t, const Matrix& eps, const NoiseSchedule& schedule);

/// (1 + w) cond - w uncond.
Matrix cfg_combine(const Matrix& out_cond, const Matrix& out_uncond, double w);

/// Denoiser returning x̂₀ for (x_t, t).  Any guidance is folded in by the caller.
using X0Model = std::function<Matrix(const Matrix& x_t, int t)>;

/// Wraps a conditional/unconditional pair into one guided model.
X0Model guided_model(std::function<Matrix(const Matrix&, int, bool conditional)> model, double w);

/// Evenly spaced, inclusive of T and 1, strictly decreasing.
std::vector<int> ddim_timesteps(int T, int steps);

/// Deterministic (eta = 0) sampling from the given x_T; returns the last x̂₀.
Matrix ddim_sample_from(const X0Model& model, Matrix x_T, const NoiseSchedule& schedule, int steps);

/// Same, starting from seeded standard normal noise of shape frames x dim.
Matrix ddim_sample(const X0Model& model, int frames, int dim, const NoiseSchedule& schedule, int steps,
                   unsigned long long seed);

struct PosteriorCoefficients {
  double x0 = 0.0;   ///< weight on x̂₀
  double xt = 0.0;   ///< weight on x_t
  double variance = 0.0;
};
PosteriorCoefficients posterior_coefficients(const NoiseSchedule& schedule, int t);

/// x_{t-1} = posterior mean + sqrt(variance) * noise; no noise term at t = 1.
Matrix ddpm_step(const X0Model& model, const Matrix& x_t, int t, const NoiseSchedule& schedule, const Matrix& noise);

/// Linear cross-fade: in each overlap the earlier segment's weight falls from 1 at the first
/// overlapping frame to 0 at the last.  Segments are folded left to right.
MotionSequence stitch_long_form(std::span<const MotionSequence> segments, double overlap_s = 4.0);

/// Bernoulli draw for classifier-free condition dropout.
bool draw_condition_dropout(std::mt19937_64& rng, double p);

/// Matrix of independent standard normals.
Matrix standard_normal(int rows, int cols, std::mt19937_64& rng);

}  // namespace elgar
