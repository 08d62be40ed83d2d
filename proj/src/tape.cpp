#include "elgar/tape.hpp"

#include <cmath>
#include <numbers>

#include "elgar/error.hpp"

namespace elgar::ad {

Var Tape::push(Matrix value, bool requires_grad, std::function<void()> back) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(back)});
  return static_cast<Var>(nodes_.size() - 1);
}

Var Tape::constant(Matrix value) { return push(std::move(value), false); }
Var Tape::leaf(Matrix value) { return push(std::move(value), true); }

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Matrix& Tape::g(Var v) {
  Node& n = nodes_[v];
  if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Tape::any(std::initializer_list<Var> vs) const {
  for (Var v : vs)
    if (nodes_[v].requires_grad) return true;
  return false;
}

namespace {
void need(bool ok, const char* what) {
  if (!ok) raise(ErrorCode::ShapeMismatch, what);
}
}  // namespace

Var Tape::matmul(Var a, Var b) {
  need(value(a).cols() == value(b).rows(), "matmul shape");
  Matrix out;
  out.noalias() = value(a) * value(b);
  const Var o = push(std::move(out), any({a, b}));
  nodes_[o].back = [this, a, b, o] {
    const Matrix& go = nodes_[o].grad;
    if (requires_grad(a)) g(a).noalias() += go * value(b).transpose();
    if (requires_grad(b)) g(b).noalias() += value(a).transpose() * go;
  };
  return o;
}

Var Tape::matmul_nt(Var a, Var b) {
  need(value(a).cols() == value(b).cols(), "matmul_nt shape");
  Matrix out;
  out.noalias() = value(a) * value(b).transpose();
  const Var o = push(std::move(out), any({a, b}));
  nodes_[o].back = [this, a, b, o] {
    const Matrix& go = nodes_[o].grad;
    if (requires_grad(a)) g(a).noalias() += go * value(b);
    if (requires_grad(b)) g(b).noalias() += go.transpose() * value(a);
  };
  return o;
}

Var Tape::add(Var a, Var b) {
  need(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), "add shape");
  const Var o = push(value(a) + value(b), any({a, b}));
  nodes_[o].back = [this, a, b, o] {
    if (requires_grad(a)) g(a) += nodes_[o].grad;
    if (requires_grad(b)) g(b) += nodes_[o].grad;
  };
  return o;
}

Var Tape::add_row(Var a, Var row) {
  need(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "add_row shape");
  const Var o = push(value(a).rowwise() + value(row).row(0), any({a, row}));
  nodes_[o].back = [this, a, row, o] {
    if (requires_grad(a)) g(a) += nodes_[o].grad;
    if (requires_grad(row)) g(row) += nodes_[o].grad.colwise().sum();
  };
  return o;
}

Var Tape::mul_row(Var a, Var row) {
  need(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "mul_row shape");
  const Matrix out = value(a).array().rowwise() * value(row).row(0).array();
  const Var o = push(out, any({a, row}));
  nodes_[o].back = [this, a, row, o] {
    const Matrix& go = nodes_[o].grad;
    if (requires_grad(a)) g(a).array() += go.array().rowwise() * value(row).row(0).array();
    if (requires_grad(row)) g(row) += (go.array() * value(a).array()).matrix().colwise().sum();
  };
  return o;
}

Var Tape::modulate(Var x, Var shift, Var scale) {
  const int d = static_cast<int>(value(x).cols());
  need(value(shift).rows() == 1 && value(shift).cols() == d && value(scale).rows() == 1 && value(scale).cols() == d,
       "modulate shape");
  const Eigen::RowVectorXd s1 = value(scale).row(0).array() + 1.0;
  Matrix out = value(x).array().rowwise() * s1.array();
  out.rowwise() += value(shift).row(0);
  const Var o = push(std::move(out), any({x, shift, scale}));
  nodes_[o].back = [this, x, shift, scale, o] {
    const Matrix& go = nodes_[o].grad;
    if (requires_grad(x)) {
      const Eigen::RowVectorXd s = value(scale).row(0).array() + 1.0;
      g(x).array() += go.array().rowwise() * s.array();
    }
    if (requires_grad(shift)) g(shift) += go.colwise().sum();
    if (requires_grad(scale)) g(scale) += (go.array() * value(x).array()).matrix().colwise().sum();
  };
  return o;
}

Var Tape::scale(Var a, double c) {
  const Var o = push(c * value(a), any({a}));
  nodes_[o].back = [this, a, c, o] {
    if (requires_grad(a)) g(a) += c * nodes_[o].grad;
  };
  return o;
}

Var Tape::gelu(Var a) {
  const Matrix& x = value(a);
  const Matrix out = x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)); });
  const Var o = push(out, any({a}));
  nodes_[o].back = [this, a, o] {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const Matrix d = value(a).unaryExpr([inv_sqrt_2pi](double v) {
      return 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
    });
    g(a).array() += nodes_[o].grad.array() * d.array();
  };
  return o;
}

Var Tape::silu(Var a) {
  const Matrix out = value(a).unaryExpr([](double v) { return v / (1.0 + std::exp(-v)); });
  const Var o = push(out, any({a}));
  nodes_[o].back = [this, a, o] {
    const Matrix d = value(a).unaryExpr([](double v) {
      const double s = 1.0 / (1.0 + std::exp(-v));
      return s * (1.0 + v * (1.0 - s));
    });
    g(a).array() += nodes_[o].grad.array() * d.array();
  };
  return o;
}

Var Tape::softmax_rows(Var a) {
  Matrix y = value(a);
  for (int r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  const Var o = push(std::move(y), any({a}));
  nodes_[o].back = [this, a, o] {
    const Matrix& y = value(o);
    const Matrix& go = nodes_[o].grad;
    const Eigen::VectorXd dot = (go.array() * y.array()).rowwise().sum();
    g(a).array() += y.array() * (go.colwise() - dot).array();
  };
  return o;
}

Var Tape::layer_norm_rows(Var a, double eps) {
  const Matrix& x = value(a);
  const int n = static_cast<int>(x.cols());
  Matrix y(x.rows(), n);
  Eigen::VectorXd inv_sigma(x.rows());
  for (int r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv_sigma(r) = 1.0 / std::sqrt(var + eps);
    y.row(r) = (x.row(r).array() - mu) * inv_sigma(r);
  }
  const Var o = push(std::move(y), any({a}));
  nodes_[o].back = [this, a, o, inv_sigma] {
    const Matrix& y = value(o);
    const Matrix& go = nodes_[o].grad;
    Matrix& ga = g(a);
    for (int r = 0; r < y.rows(); ++r) {
      const double mg = go.row(r).mean();
      const double mgy = go.row(r).dot(y.row(r)) / y.cols();
      ga.row(r).array() += inv_sigma(r) * (go.row(r).array() - mg - y.row(r).array() * mgy);
    }
  };
  return o;
}

Var Tape::slice_cols(Var a, int start, int count) {
  need(start >= 0 && count >= 0 && start + count <= value(a).cols(), "slice_cols range");
  const Var o = push(value(a).middleCols(start, count), any({a}));
  nodes_[o].back = [this, a, start, count, o] {
    g(a).middleCols(start, count) += nodes_[o].grad;
  };
  return o;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  need(!parts.empty(), "concat_cols of nothing");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool req = false;
  for (Var p : parts) {
    need(value(p).rows() == rows, "concat_cols rows");
    cols += value(p).cols();
    req = req || requires_grad(p);
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  const Var o = push(std::move(out), req);
  nodes_[o].back = [this, parts, o] {
    Eigen::Index c = 0;
    for (Var p : parts) {
      const Eigen::Index w = value(p).cols();
      if (requires_grad(p)) g(p) += nodes_[o].grad.middleCols(c, w);
      c += w;
    }
  };
  return o;
}

Var Tape::repeat_rows(Var row, int rows) {
  need(value(row).rows() == 1 && rows >= 1, "repeat_rows shape");
  const Var o = push(value(row).replicate(rows, 1), any({row}));
  nodes_[o].back = [this, row, o] {
    g(row) += nodes_[o].grad.colwise().sum();
  };
  return o;
}

void Tape::backward(Var out, const Matrix& seed) {
  need(seed.rows() == value(out).rows() && seed.cols() == value(out).cols(), "backward seed shape");
  g(out) += seed;
  for (Var v = out; v >= 0; --v) {
    Node& n = nodes_[v];
    if (!n.requires_grad || !n.back || n.grad.size() == 0) continue;
    n.back();
  }
}

}  // namespace elgar::ad
