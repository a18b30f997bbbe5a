#pragma once

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// A Tape records every forward primitive as a node holding its value and a
// closure that maps the node's output gradient to input gradients. Nodes are
// appended in evaluation order, so a reverse sweep is a valid topological
// order and visits each node once.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "rfm/matrix.hpp"

namespace rfm::ad {

class Tape;

/// Persistent trainable tensor. A tape binds it as a leaf and, on backward,
/// accumulates the leaf gradient into `grad`.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

/// Handle to a tape node.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double item() const;
  bool requires_grad() const;

  Tape* tape() const noexcept { return tape_; }
  int id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Compressed sparse row matrix used as a constant operand (aggregation, pooling).
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  Matrix dense() const;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  Var parameter(Parameter& p);

  /// Appends a node. Throws NonFinite if `value` has a NaN/Inf entry.
  Var push(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward, const char* op);

  /// Reverse sweep from a 1x1 node; parameter leaves receive their gradients.
  void backward(Var loss);

  /// Gradient of the last backward() with respect to `v` (zeros if unreached).
  Matrix grad(Var v) const;

  /// Adds `g` into the gradient slot of `v` (used by backward closures).
  void accumulate(Var v, const Matrix& g);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const char* op_name(int id) const { return nodes_[static_cast<std::size_t>(id)].op; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    Parameter* sink = nullptr;
    bool requires_grad = false;
    const char* op = "";
  };
  std::vector<Node> nodes_;
};

// ---- primitives -----------------------------------------------------------
// Binary elementwise ops broadcast `b` when it is 1x1, 1xC or Rx1.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var square(Var a);

Var tanh_act(Var a);
Var relu_act(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var abs(Var a);

/// Row-wise softmax / log-softmax.
Var softmax(Var a);
Var log_softmax(Var a);

Var sum(Var a);
Var mean(Var a);
/// R x C -> R x 1.
Var row_sum(Var a);
/// Row-wise Euclidean norm, R x C -> R x 1. Zero rows get a zero subgradient.
Var l2_norm(Var a);
/// Row-wise inner product of same-shape operands, R x C -> R x 1.
Var row_dot(Var a, Var b);

Var concat(Var a, Var b);
Var gather_rows(Var a, std::vector<std::size_t> index);
/// out(i, 0) = a(i, index[i]).
Var pick(Var a, std::vector<std::size_t> index);
Var spmm(std::shared_ptr<const CsrMatrix> m, Var a);

/// Mean cross-entropy of row-wise logits against integer labels.
Var cross_entropy(Var logits, const std::vector<std::size_t>& labels);
/// Per-row cross-entropy, R x 1.
Var cross_entropy_rows(Var logits, const std::vector<std::size_t>& labels);

// Curvature trigonometry, elementwise. `c` is the effective curvature.
Var tan_c(Var a, double c);
Var artan_c(Var a, double c);
/// tan_c(x)/x and artan_c(x)/x, smooth through x = 0 (value 1).
Var tan_c_over_x(Var a, double c);
Var artan_c_over_x(Var a, double c);
/// Row-wise radial clip to |x| <= (1 - 1e-7)/sqrt|c| when c < 0; identity otherwise.
Var project_ball(Var a, double c);

}  // namespace rfm::ad
