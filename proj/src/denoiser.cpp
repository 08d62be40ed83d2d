#include "elgar/denoiser.hpp"

#include <cmath>
#include <random>

#include "elgar/error.hpp"

namespace elgar {

void DenoiserConfig::validate() const {
  if (blocks < 1) raise(ErrorCode::InvalidArgument, "denoiser needs at least one block");
  if (dim < 2 || dim % 2 != 0) raise(ErrorCode::InvalidArgument, "latent dim must be even and >= 2");
  if (heads < 1 || dim % heads != 0) raise(ErrorCode::InvalidArgument, "latent dim must be divisible by heads");
  if (cond_dim < 1) raise(ErrorCode::InvalidArgument, "condition dim must be >= 1");
  if (max_frames < 1) raise(ErrorCode::InvalidArgument, "max frames must be >= 1");
  if (feature_dim < 1) raise(ErrorCode::InvalidArgument, "feature dim must be >= 1");
}

long long DenoiserParams::count() const {
  long long n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

int DenoiserParams::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  raise(ErrorCode::InvalidArgument, "unknown parameter " + name);
}

long long denoiser_parameter_count(const DenoiserConfig& c) {
  const long long d = c.dim, B = c.blocks, D = c.cond_dim, X = c.feature_dim;
  return (4 + 25 * B) * d * d + (2 * X + D + 7 + 22 * B) * d + X;
}

namespace {

enum class Init { Xavier, Zero, Normal };

struct Layout {
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> shapes;
  std::vector<Init> inits;
  void add(std::string n, int r, int c, Init i) {
    names.push_back(std::move(n));
    shapes.emplace_back(r, c);
    inits.push_back(i);
  }
};

Layout layout(const DenoiserConfig& c) {
  const int d = c.dim;
  Layout L;
  L.add("in.w", c.feature_dim, d, Init::Xavier);
  L.add("in.b", 1, d, Init::Zero);
  L.add("cond.w", c.cond_dim, d, Init::Xavier);
  L.add("cond.b", 1, d, Init::Zero);
  L.add("cond.null", 1, d, Init::Normal);
  L.add("time.w1", d, d, Init::Normal);
  L.add("time.b1", 1, d, Init::Zero);
  L.add("time.w2", d, d, Init::Normal);
  L.add("time.b2", 1, d, Init::Zero);
  for (int b = 0; b < c.blocks; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    L.add(p + "ada.w", d, 9 * d, Init::Zero);
    L.add(p + "ada.b", 1, 9 * d, Init::Zero);
    L.add(p + "attn.wqkv", d, 3 * d, Init::Xavier);
    L.add(p + "attn.bqkv", 1, 3 * d, Init::Zero);
    L.add(p + "attn.wo", d, d, Init::Xavier);
    L.add(p + "attn.bo", 1, d, Init::Zero);
    L.add(p + "cross.wq", d, d, Init::Xavier);
    L.add(p + "cross.bq", 1, d, Init::Zero);
    L.add(p + "cross.wkv", d, 2 * d, Init::Xavier);
    L.add(p + "cross.bkv", 1, 2 * d, Init::Zero);
    L.add(p + "cross.wo", d, d, Init::Xavier);
    L.add(p + "cross.bo", 1, d, Init::Zero);
    L.add(p + "ffn.w1", d, 4 * d, Init::Xavier);
    L.add(p + "ffn.b1", 1, 4 * d, Init::Zero);
    L.add(p + "ffn.w2", 4 * d, d, Init::Xavier);
    L.add(p + "ffn.b2", 1, d, Init::Zero);
  }
  L.add("final.ada.w", d, 2 * d, Init::Zero);
  L.add("final.ada.b", 1, 2 * d, Init::Zero);
  L.add("out.w", d, c.feature_dim, Init::Xavier);
  L.add("out.b", 1, c.feature_dim, Init::Zero);
  return L;
}

Matrix positional_table(int frames, int dim) {
  Matrix pe(frames, dim);
  for (int k = 0; k < frames; ++k) pe.row(k) = sinusoidal_embedding(k, dim);
  return pe;
}

// Multi-head scaled dot-product attention of q against k/v (all already projected).
ad::Var attention(ad::Tape& tp, ad::Var q, ad::Var k, ad::Var v, int heads) {
  const int d = static_cast<int>(tp.value(q).cols());
  const int dh = d / heads;
  const double s = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ad::Var> outs;
  for (int h = 0; h < heads; ++h) {
    const ad::Var qh = tp.slice_cols(q, h * dh, dh);
    const ad::Var kh = tp.slice_cols(k, h * dh, dh);
    const ad::Var vh = tp.slice_cols(v, h * dh, dh);
    const ad::Var p = tp.softmax_rows(tp.scale(tp.matmul_nt(qh, kh), s));
    outs.push_back(tp.matmul(p, vh));
  }
  return heads == 1 ? outs[0] : tp.concat_cols(outs);
}

ad::Var linear(ad::Tape& tp, ad::Var x, ad::Var w, ad::Var b) { return tp.add_row(tp.matmul(x, w), b); }

}  // namespace

Eigen::RowVectorXd sinusoidal_embedding(double position, int dim) {
  Eigen::RowVectorXd e(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double w = std::pow(10000.0, -static_cast<double>(i) / half);
    e(i) = std::sin(position * w);
    e(i + half) = std::cos(position * w);
  }
  return e;
}

FeatureNormalization FeatureNormalization::identity(int dim) {
  return {Eigen::RowVectorXd::Zero(dim), Eigen::RowVectorXd::Ones(dim)};
}

Matrix FeatureNormalization::to_model(const Matrix& x) const {
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

Matrix FeatureNormalization::from_model(const Matrix& z) const {
  return (z.array().rowwise() * scale.array()).rowwise() + mean.array();
}

FeatureNormalization feature_statistics(const std::vector<Matrix>& slices, double floor) {
  if (slices.empty()) raise(ErrorCode::InvalidArgument, "no slices to take statistics from");
  const Eigen::Index dim = slices[0].cols();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim);
  long long n = 0;
  for (const Matrix& s : slices) {
    if (s.cols() != dim) raise(ErrorCode::ShapeMismatch, "slices differ in feature width");
    sum += s.colwise().sum();
    n += s.rows();
  }
  const Eigen::RowVectorXd mean = sum / static_cast<double>(n);
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(dim);
  for (const Matrix& s : slices) sq += (s.rowwise() - mean).array().square().matrix().colwise().sum();
  const Eigen::RowVectorXd scale = (sq / static_cast<double>(n)).array().sqrt().max(floor);
  return {mean, scale};
}

DenoiserParams init_denoiser(const DenoiserConfig& config, unsigned long long seed) {
  config.validate();
  const Layout L = layout(config);
  DenoiserParams p;
  p.config = config;
  p.names = L.names;
  p.normalization = FeatureNormalization::identity(config.feature_dim);
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < L.names.size(); ++i) {
    const auto [r, c] = L.shapes[i];
    Matrix m = Matrix::Zero(r, c);
    if (L.inits[i] == Init::Xavier) {
      const double a = std::sqrt(6.0 / (r + c));
      std::uniform_real_distribution<double> u(-a, a);
      for (int x = 0; x < r; ++x)
        for (int y = 0; y < c; ++y) m(x, y) = u(rng);
    } else if (L.inits[i] == Init::Normal) {
      std::normal_distribution<double> n(0.0, 0.02);
      for (int x = 0; x < r; ++x)
        for (int y = 0; y < c; ++y) m(x, y) = n(rng);
    }
    p.tensors.push_back(std::move(m));
  }
  return p;
}

ad::Var denoiser_graph(ad::Tape& tp, const DenoiserParams& params, const Matrix& x_t, int t, const Matrix* cond,
                       bool track, std::vector<ad::Var>* leaves, ForwardProbe* probe) {
  const DenoiserConfig& c = params.config;
  const int F = static_cast<int>(x_t.rows());
  const int d = c.dim;
  if (x_t.cols() != c.feature_dim || F < 1 || F > c.max_frames) {
    raise(ErrorCode::ShapeMismatch, "x_t must be F x " + std::to_string(c.feature_dim) + " with 1 <= F <= " +
                                        std::to_string(c.max_frames));
  }
  if (cond && (cond->rows() != F || cond->cols() != c.cond_dim)) {
    raise(ErrorCode::ShapeMismatch, "condition must be F x " + std::to_string(c.cond_dim));
  }
  std::vector<ad::Var> P;
  P.reserve(params.tensors.size());
  for (const Matrix& m : params.tensors) P.push_back(track ? tp.leaf(m) : tp.constant(m));
  if (leaves) *leaves = P;
  int next = 0;
  auto take = [&]() { return P[next++]; };

  const ad::Var in_w = take(), in_b = take();
  const ad::Var cond_w = take(), cond_b = take(), null_e = take();
  const ad::Var tw1 = take(), tb1 = take(), tw2 = take(), tb2 = take();

  const ad::Var pe = tp.constant(positional_table(F, d));
  ad::Var h = tp.add(linear(tp, tp.constant(x_t), in_w, in_b), pe);

  ad::Var temb = tp.constant(sinusoidal_embedding(t, d));
  temb = linear(tp, tp.silu(linear(tp, temb, tw1, tb1)), tw2, tb2);
  const ad::Var cact = tp.silu(temb);

  ad::Var ctok = cond ? linear(tp, tp.constant(*cond), cond_w, cond_b) : tp.repeat_rows(null_e, F);
  ctok = tp.add(ctok, pe);

  auto gated = [&](ad::Var branch, ad::Var gate) {
    const ad::Var g = tp.mul_row(branch, gate);
    if (probe) probe->branches.push_back(tp.value(g));
    h = tp.add(h, g);
  };

  for (int b = 0; b < c.blocks; ++b) {
    const ad::Var ada_w = take(), ada_b = take();
    const ad::Var wqkv = take(), bqkv = take(), wo = take(), bo = take();
    const ad::Var cwq = take(), cbq = take(), cwkv = take(), cbkv = take(), cwo = take(), cbo = take();
    const ad::Var f1 = take(), fb1 = take(), f2 = take(), fb2 = take();
    const ad::Var mod = linear(tp, cact, ada_w, ada_b);
    auto piece = [&](int i) { return tp.slice_cols(mod, i * d, d); };

    ad::Var a = tp.modulate(tp.layer_norm_rows(h), piece(0), piece(1));
    const ad::Var qkv = linear(tp, a, wqkv, bqkv);
    ad::Var att = attention(tp, tp.slice_cols(qkv, 0, d), tp.slice_cols(qkv, d, d), tp.slice_cols(qkv, 2 * d, d), c.heads);
    gated(linear(tp, att, wo, bo), piece(2));

    a = tp.modulate(tp.layer_norm_rows(h), piece(3), piece(4));
    const ad::Var q = linear(tp, a, cwq, cbq);
    const ad::Var kv = linear(tp, ctok, cwkv, cbkv);
    att = attention(tp, q, tp.slice_cols(kv, 0, d), tp.slice_cols(kv, d, d), c.heads);
    gated(linear(tp, att, cwo, cbo), piece(5));

    a = tp.modulate(tp.layer_norm_rows(h), piece(6), piece(7));
    gated(linear(tp, tp.gelu(linear(tp, a, f1, fb1)), f2, fb2), piece(8));
  }

  const ad::Var fw = take(), fb = take(), ow = take(), ob = take();
  const ad::Var fmod = linear(tp, cact, fw, fb);
  const ad::Var a = tp.modulate(tp.layer_norm_rows(h), tp.slice_cols(fmod, 0, d), tp.slice_cols(fmod, d, d));
  const ad::Var out = linear(tp, a, ow, ob);
  if (!tp.value(out).allFinite()) raise(ErrorCode::NonFiniteActivation, "denoiser produced a non-finite output");
  return out;
}

Matrix denoiser_forward(const DenoiserParams& params, const Matrix& x_t, int t, const Matrix* cond,
                        ForwardProbe* probe) {
  ad::Tape tp;
  const ad::Var out = denoiser_graph(tp, params, x_t, t, cond, false, nullptr, probe);
  return tp.value(out);
}

std::vector<Matrix> zero_gradients(const DenoiserParams& params) {
  std::vector<Matrix> g;
  g.reserve(params.tensors.size());
  for (const Matrix& m : params.tensors) g.push_back(Matrix::Zero(m.rows(), m.cols()));
  return g;
}

LossBreakdown denoiser_backward(const DenoiserParams& params, const TrainItem& item, const NoiseSchedule& schedule,
                                const LossWeights& weights, const Skeleton& skeleton, const CelloSpec& cello,
                                std::vector<Matrix>& grads) {
  if (grads.size() != params.tensors.size()) raise(ErrorCode::ShapeMismatch, "gradient buffer does not match params");
  const FeatureNormalization& norm = params.normalization;
  const Matrix x_t = q_sample(norm.to_model(item.x0), item.t, item.eps, schedule);
  ad::Tape tp;
  std::vector<ad::Var> leaves;
  const Matrix* cond = item.drop_condition ? nullptr : &item.condition.features;
  const ad::Var out = denoiser_graph(tp, params, x_t, item.t, cond, true, &leaves);
  Matrix seed;
  const LossContext ctx{&skeleton, &cello, &item.condition};
  const LossBreakdown loss = evaluate_losses(norm.from_model(tp.value(out)), item.x0, ctx, weights, &seed);
  if (!std::isfinite(loss.total)) raise(ErrorCode::NonFiniteActivation, "loss is not finite");
  seed = seed.array().rowwise() * norm.scale.array();
  tp.backward(out, seed);
  for (size_t i = 0; i < leaves.size(); ++i) grads[i] += tp.grad(leaves[i]);
  return loss;
}

}  // namespace elgar
