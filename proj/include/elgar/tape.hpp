#pragma once

#include <functional>
#include <vector>

#include "elgar/types.hpp"

namespace elgar::ad {

/// Handle into a Tape.
using Var = int;

/// Minimal reverse-mode autodiff over dense matrices.  Nodes are appended in evaluation order
/// and `backward` walks them in reverse.  Row vectors (1 x n) broadcast over rows where noted.
class Tape {
 public:
  /// Node without a gradient.
  Var constant(Matrix value);
  /// Node whose gradient is tracked.
  Var leaf(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v].value; }
  /// Accumulated gradient (zero matrix when nothing reached the node).
  Matrix grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v].requires_grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  Var matmul(Var a, Var b);       ///< a b
  Var matmul_nt(Var a, Var b);    ///< a b^T
  Var add(Var a, Var b);
  Var add_row(Var a, Var row);    ///< a + broadcast row
  Var mul_row(Var a, Var row);    ///< a .* broadcast row
  Var modulate(Var x, Var shift, Var scale);  ///< x .* (1 + scale) + shift, both rows
  Var scale(Var a, double c);
  Var gelu(Var a);                ///< exact erf form
  Var silu(Var a);
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var a, double eps = 1e-6);  ///< no affine parameters
  Var slice_cols(Var a, int start, int count);
  Var concat_cols(const std::vector<Var>& parts);
  Var repeat_rows(Var row, int rows);

  /// Seeds d(out) and propagates to every node that requires a gradient.
  void backward(Var out, const Matrix& seed);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void()> back;
  };
  Var push(Matrix value, bool requires_grad, std::function<void()> back = {});
  Matrix& g(Var v);
  bool any(std::initializer_list<Var> vs) const;

  std::vector<Node> nodes_;
};

}  // namespace elgar::ad
