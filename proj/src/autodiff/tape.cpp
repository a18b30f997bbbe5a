#include "rfm/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rfm::ad {

// ---- Var / Tape -------------------------------------------------------------

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeMismatch("item() on a non-scalar node");
  return v[0];
}

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Matrix CsrMatrix::dense() const {
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) out(i, col_idx[k]) += values[k];
  return out;
}

Var Tape::constant(Matrix value) { return push(std::move(value), {}, nullptr, "constant"); }

Var Tape::variable(Matrix value) {
  Var v = push(std::move(value), {}, nullptr, "variable");
  nodes_.back().requires_grad = true;
  return v;
}

Var Tape::parameter(Parameter& p) {
  Var v = push(p.value, {}, nullptr, "parameter");
  nodes_.back().requires_grad = true;
  nodes_.back().sink = &p;
  return v;
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward, const char* op) {
  for (double x : value.data())
    if (!std::isfinite(x)) throw NonFinite(std::string("non-finite output from ") + op);
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw ShapeMismatch("operand belongs to a different tape");
    n.requires_grad = n.requires_grad || requires_grad(in.id_);
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(v.id_)];
  if (!n.requires_grad) return;
  if (!g.same_shape(n.value)) throw ShapeMismatch(std::string("gradient shape mismatch at ") + n.op);
  if (n.grad.empty() && !n.value.empty()) {
    n.grad = g;
    return;
  }
  auto& dst = n.grad.data();
  const auto& src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw ShapeMismatch("loss belongs to a different tape");
  if (loss.value().size() != 1) throw NonScalarLoss("backward needs a 1x1 loss");
  for (auto& n : nodes_) n.grad = Matrix();
  Node& root = nodes_[static_cast<std::size_t>(loss.id_)];
  if (!root.requires_grad) return;
  root.grad = Matrix(1, 1, 1.0);
  for (int i = loss.id_; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.sink) {
      if (!n.sink->grad.same_shape(n.grad)) n.sink->grad = Matrix(n.grad.rows(), n.grad.cols());
      auto& dst = n.sink->grad.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
    }
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id_)];
  if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

// ---- helpers ----------------------------------------------------------------

namespace {

enum class Bcast { Same, Row, Col, Scalar };

Bcast broadcast_kind(const Matrix& a, const Matrix& b, const char* op) {
  if (a.same_shape(b)) return Bcast::Same;
  if (b.rows() == 1 && b.cols() == 1) return Bcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Bcast::Row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Bcast::Col;
  throw ShapeMismatch(std::string(op) + ": incompatible shapes " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
}

inline std::size_t bidx(Bcast k, std::size_t i, std::size_t j, std::size_t cols) {
  switch (k) {
    case Bcast::Same: return i * cols + j;
    case Bcast::Row: return j;
    case Bcast::Col: return i;
    case Bcast::Scalar: return 0;
  }
  return 0;
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw ShapeMismatch("operation on an unbound Var");
  return *a.tape();
}

template <class Fwd, class Dfn>
Var unary(Var a, const char* op, Fwd fwd, Dfn dfn) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return tape_of(a).push(std::move(out), {a},
                         [a, out_id = static_cast<int>(tape_of(a).size()), dfn](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(a.id());
                           const Matrix& y = t.value(out_id);
                           Matrix gi(x.rows(), x.cols());
                           for (std::size_t i = 0; i < x.size(); ++i) gi[i] = g[i] * dfn(x[i], y[i]);
                           t.accumulate(a, gi);
                         },
                         op);
}

}  // namespace

// ---- linear algebra -----------------------------------------------------------

Var matmul(Var a, Var b) {
  Matrix out = rfm::matmul(a.value(), b.value());
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b](Tape& t, const Matrix& g) {
                           if (t.requires_grad(a.id())) t.accumulate(a, rfm::matmul(g, t.value(b.id()).transposed()));
                           if (t.requires_grad(b.id())) t.accumulate(b, rfm::matmul(t.value(a.id()).transposed(), g));
                         },
                         "matmul");
}

Var transpose(Var a) {
  return tape_of(a).push(a.value().transposed(), {a},
                         [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transposed()); }, "transpose");
}

// ---- broadcasting arithmetic ----------------------------------------------------

Var add(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const Bcast k = broadcast_kind(av, bv, "add");
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) + bv[bidx(k, i, j, av.cols())];
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b, k](Tape& t, const Matrix& g) {
                           t.accumulate(a, g);
                           if (!t.requires_grad(b.id())) return;
                           const Matrix& bv = t.value(b.id());
                           Matrix gb(bv.rows(), bv.cols());
                           for (std::size_t i = 0; i < g.rows(); ++i)
                             for (std::size_t j = 0; j < g.cols(); ++j) gb[bidx(k, i, j, g.cols())] += g(i, j);
                           t.accumulate(b, gb);
                         },
                         "add");
}

Var sub(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const Bcast k = broadcast_kind(av, bv, "sub");
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) - bv[bidx(k, i, j, av.cols())];
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b, k](Tape& t, const Matrix& g) {
                           t.accumulate(a, g);
                           if (!t.requires_grad(b.id())) return;
                           const Matrix& bv = t.value(b.id());
                           Matrix gb(bv.rows(), bv.cols());
                           for (std::size_t i = 0; i < g.rows(); ++i)
                             for (std::size_t j = 0; j < g.cols(); ++j) gb[bidx(k, i, j, g.cols())] -= g(i, j);
                           t.accumulate(b, gb);
                         },
                         "sub");
}

Var mul(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const Bcast k = broadcast_kind(av, bv, "mul");
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) * bv[bidx(k, i, j, av.cols())];
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b, k](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           const Matrix& bv = t.value(b.id());
                           if (t.requires_grad(a.id())) {
                             Matrix ga(av.rows(), av.cols());
                             for (std::size_t i = 0; i < g.rows(); ++i)
                               for (std::size_t j = 0; j < g.cols(); ++j)
                                 ga(i, j) = g(i, j) * bv[bidx(k, i, j, g.cols())];
                             t.accumulate(a, ga);
                           }
                           if (t.requires_grad(b.id())) {
                             Matrix gb(bv.rows(), bv.cols());
                             for (std::size_t i = 0; i < g.rows(); ++i)
                               for (std::size_t j = 0; j < g.cols(); ++j)
                                 gb[bidx(k, i, j, g.cols())] += g(i, j) * av(i, j);
                             t.accumulate(b, gb);
                           }
                         },
                         "mul");
}

Var div(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const Bcast k = broadcast_kind(av, bv, "div");
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) / bv[bidx(k, i, j, av.cols())];
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b, k](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           const Matrix& bv = t.value(b.id());
                           if (t.requires_grad(a.id())) {
                             Matrix ga(av.rows(), av.cols());
                             for (std::size_t i = 0; i < g.rows(); ++i)
                               for (std::size_t j = 0; j < g.cols(); ++j)
                                 ga(i, j) = g(i, j) / bv[bidx(k, i, j, g.cols())];
                             t.accumulate(a, ga);
                           }
                           if (t.requires_grad(b.id())) {
                             Matrix gb(bv.rows(), bv.cols());
                             for (std::size_t i = 0; i < g.rows(); ++i)
                               for (std::size_t j = 0; j < g.cols(); ++j) {
                                 const double d = bv[bidx(k, i, j, g.cols())];
                                 gb[bidx(k, i, j, g.cols())] -= g(i, j) * av(i, j) / (d * d);
                               }
                             t.accumulate(b, gb);
                           }
                         },
                         "div");
}

Var scale(Var a, double s) {
  return unary(a, "scale", [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, "add_scalar", [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var neg(Var a) { return scale(a, -1.0); }

Var square(Var a) {
  return unary(a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

// ---- activations / elementwise --------------------------------------------------

Var tanh_act(Var a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu_act(Var a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
  return unary(a, "sqrt", [](double x) { return std::sqrt(x); },
               [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Var abs(Var a) {
  return unary(a, "abs", [](double x) { return std::abs(x); },
               [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

// ---- row-wise ---------------------------------------------------------------------

Var softmax(Var a) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto r = av.row_span(i);
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) z += (out(i, j) = std::exp(r[j] - m));
    for (std::size_t j = 0; j < r.size(); ++j) out(i, j) /= z;
  }
  const int out_id = static_cast<int>(tape_of(a).size());
  return tape_of(a).push(std::move(out), {a},
                         [a, out_id](Tape& t, const Matrix& g) {
                           const Matrix& y = t.value(out_id);
                           Matrix gi(y.rows(), y.cols());
                           for (std::size_t i = 0; i < y.rows(); ++i) {
                             double s = 0.0;
                             for (std::size_t j = 0; j < y.cols(); ++j) s += g(i, j) * y(i, j);
                             for (std::size_t j = 0; j < y.cols(); ++j) gi(i, j) = y(i, j) * (g(i, j) - s);
                           }
                           t.accumulate(a, gi);
                         },
                         "softmax");
}

Var log_softmax(Var a) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto r = av.row_span(i);
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (double x : r) z += std::exp(x - m);
    const double lz = m + std::log(z);
    for (std::size_t j = 0; j < r.size(); ++j) out(i, j) = r[j] - lz;
  }
  const int out_id = static_cast<int>(tape_of(a).size());
  return tape_of(a).push(std::move(out), {a},
                         [a, out_id](Tape& t, const Matrix& g) {
                           const Matrix& y = t.value(out_id);
                           Matrix gi(y.rows(), y.cols());
                           for (std::size_t i = 0; i < y.rows(); ++i) {
                             double s = 0.0;
                             for (std::size_t j = 0; j < y.cols(); ++j) s += g(i, j);
                             for (std::size_t j = 0; j < y.cols(); ++j)
                               gi(i, j) = g(i, j) - std::exp(y(i, j)) * s;
                           }
                           t.accumulate(a, gi);
                         },
                         "log_softmax");
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  return tape_of(a).push(Matrix(1, 1, s), {a},
                         [a](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           t.accumulate(a, Matrix(av.rows(), av.cols(), g[0]));
                         },
                         "sum");
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw ShapeMismatch("mean of an empty tensor");
  return scale(sum(a), 1.0 / n);
}

Var row_sum(Var a) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (double x : av.row_span(i)) out(i, 0) += x;
  return tape_of(a).push(std::move(out), {a},
                         [a](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           Matrix gi(av.rows(), av.cols());
                           for (std::size_t i = 0; i < av.rows(); ++i)
                             for (std::size_t j = 0; j < av.cols(); ++j) gi(i, j) = g(i, 0);
                           t.accumulate(a, gi);
                         },
                         "row_sum");
}

Var l2_norm(Var a) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) out(i, 0) = norm2(av.row_span(i));
  const int out_id = static_cast<int>(tape_of(a).size());
  return tape_of(a).push(std::move(out), {a},
                         [a, out_id](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           const Matrix& n = t.value(out_id);
                           Matrix gi(av.rows(), av.cols());
                           for (std::size_t i = 0; i < av.rows(); ++i) {
                             if (n(i, 0) == 0.0) continue;
                             const double s = g(i, 0) / n(i, 0);
                             for (std::size_t j = 0; j < av.cols(); ++j) gi(i, j) = s * av(i, j);
                           }
                           t.accumulate(a, gi);
                         },
                         "l2_norm");
}

Var row_dot(Var a, Var b) {
  if (!a.value().same_shape(b.value())) throw ShapeMismatch("row_dot operands differ in shape");
  return row_sum(mul(a, b));
}

// ---- structural -------------------------------------------------------------------

Var concat(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows()) throw ShapeMismatch("concat operands differ in row count");
  Matrix out(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j);
    for (std::size_t j = 0; j < bv.cols(); ++j) out(i, av.cols() + j) = bv(i, j);
  }
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b](Tape& t, const Matrix& g) {
                           const std::size_t ca = t.value(a.id()).cols();
                           const std::size_t cb = t.value(b.id()).cols();
                           Matrix ga(g.rows(), ca), gb(g.rows(), cb);
                           for (std::size_t i = 0; i < g.rows(); ++i) {
                             for (std::size_t j = 0; j < ca; ++j) ga(i, j) = g(i, j);
                             for (std::size_t j = 0; j < cb; ++j) gb(i, j) = g(i, ca + j);
                           }
                           t.accumulate(a, ga);
                           t.accumulate(b, gb);
                         },
                         "concat");
}

Var gather_rows(Var a, std::vector<std::size_t> index) {
  const Matrix& av = a.value();
  Matrix out(index.size(), av.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= av.rows()) throw IndexOutOfRange("gather_rows index past the last row");
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(index[i], j);
  }
  return tape_of(a).push(std::move(out), {a},
                         [a, index = std::move(index)](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           Matrix gi(av.rows(), av.cols());
                           for (std::size_t i = 0; i < index.size(); ++i)
                             for (std::size_t j = 0; j < av.cols(); ++j) gi(index[i], j) += g(i, j);
                           t.accumulate(a, gi);
                         },
                         "gather_rows");
}

Var pick(Var a, std::vector<std::size_t> index) {
  const Matrix& av = a.value();
  if (index.size() != av.rows()) throw ShapeMismatch("pick needs one index per row");
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= av.cols()) throw IndexOutOfRange("pick index past the last column");
    out(i, 0) = av(i, index[i]);
  }
  return tape_of(a).push(std::move(out), {a},
                         [a, index = std::move(index)](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           Matrix gi(av.rows(), av.cols());
                           for (std::size_t i = 0; i < index.size(); ++i) gi(i, index[i]) = g(i, 0);
                           t.accumulate(a, gi);
                         },
                         "pick");
}

Var spmm(std::shared_ptr<const CsrMatrix> m, Var a) {
  const Matrix& av = a.value();
  if (m->cols != av.rows()) throw ShapeMismatch("spmm inner dimensions differ");
  Matrix out(m->rows, av.cols());
  for (std::size_t i = 0; i < m->rows; ++i)
    for (std::size_t k = m->row_ptr[i]; k < m->row_ptr[i + 1]; ++k) {
      const double w = m->values[k];
      const std::size_t j = m->col_idx[k];
      for (std::size_t c = 0; c < av.cols(); ++c) out(i, c) += w * av(j, c);
    }
  return tape_of(a).push(std::move(out), {a},
                         [a, m](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           Matrix gi(av.rows(), av.cols());
                           for (std::size_t i = 0; i < m->rows; ++i)
                             for (std::size_t k = m->row_ptr[i]; k < m->row_ptr[i + 1]; ++k) {
                               const double w = m->values[k];
                               const std::size_t j = m->col_idx[k];
                               for (std::size_t c = 0; c < av.cols(); ++c) gi(j, c) += w * g(i, c);
                             }
                           t.accumulate(a, gi);
                         },
                         "spmm");
}

Var cross_entropy_rows(Var logits, const std::vector<std::size_t>& labels) {
  if (labels.size() != logits.rows()) throw ShapeMismatch("one label per logit row required");
  for (std::size_t y : labels)
    if (y >= logits.cols()) throw LabelOutOfRange("label " + std::to_string(y) + " >= class count");
  return neg(pick(log_softmax(logits), labels));
}

Var cross_entropy(Var logits, const std::vector<std::size_t>& labels) {
  return mean(cross_entropy_rows(logits, labels));
}

// ---- curvature trigonometry -------------------------------------------------------

namespace {

// Series switch-over for the x -> 0 limits; |c| x^2 below this uses a 4-term series.
constexpr double kSeriesCut = 1e-4;

double tan_c_value(double x, double c) {
  if (c == 0.0) return x;
  if (c < 0.0) {
    const double s = std::sqrt(-c);
    return std::tanh(s * x) / s;
  }
  const double s = std::sqrt(c);
  if (s * std::abs(x) >= std::numbers::pi / 2) throw DomainViolation("tan_c argument beyond the injectivity radius");
  return std::tan(s * x) / s;
}

double artan_c_value(double y, double c) {
  if (c == 0.0) return y;
  if (c < 0.0) {
    const double s = std::sqrt(-c);
    if (s * std::abs(y) >= 1.0) throw DomainViolation("artan_c argument outside the ball");
    return std::atanh(s * y) / s;
  }
  const double s = std::sqrt(c);
  return std::atan(s * y) / s;
}

}  // namespace

Var tan_c(Var a, double c) {
  return unary(a, "tan_c", [c](double x) { return tan_c_value(x, c); },
               [c](double, double y) { return 1.0 + c * y * y; });
}

Var artan_c(Var a, double c) {
  return unary(a, "artan_c", [c](double y) { return artan_c_value(y, c); },
               [c](double x, double) { return 1.0 / (1.0 + c * x * x); });
}

Var tan_c_over_x(Var a, double c) {
  auto f = [c](double x) {
    const double u = c * x * x;
    if (std::abs(u) < kSeriesCut) return 1.0 + u / 3.0 + 2.0 * u * u / 15.0 + 17.0 * u * u * u / 315.0;
    return tan_c_value(x, c) / x;
  };
  auto df = [c](double x, double) {
    const double u = c * x * x;
    if (std::abs(u) < kSeriesCut) return c * x * (2.0 / 3.0 + 8.0 * u / 15.0 + 102.0 * u * u / 315.0);
    const double T = tan_c_value(x, c);
    return ((1.0 + c * T * T) * x - T) / (x * x);
  };
  return unary(a, "tan_c_over_x", f, df);
}

Var artan_c_over_x(Var a, double c) {
  auto f = [c](double y) {
    const double u = c * y * y;
    if (std::abs(u) < kSeriesCut) return 1.0 - u / 3.0 + u * u / 5.0 - u * u * u / 7.0;
    return artan_c_value(y, c) / y;
  };
  auto df = [c](double y, double) {
    const double u = c * y * y;
    if (std::abs(u) < kSeriesCut) return c * y * (-2.0 / 3.0 + 4.0 * u / 5.0 - 6.0 * u * u / 7.0);
    const double A = artan_c_value(y, c);
    return (y / (1.0 + c * y * y) - A) / (y * y);
  };
  return unary(a, "artan_c_over_x", f, df);
}

Var project_ball(Var a, double c) {
  if (c >= 0.0) return a;
  const double cap = (1.0 - 1e-7) / std::sqrt(-c);
  const Matrix& av = a.value();
  Matrix out = av;
  bool any = false;
  for (std::size_t i = 0; i < av.rows(); ++i) {
    const double n = norm2(av.row_span(i));
    if (n > cap) {
      any = true;
      for (double& x : out.row_span(i)) x *= cap / n;
    }
  }
  if (!any) return a;
  return tape_of(a).push(std::move(out), {a},
                         [a, cap](Tape& t, const Matrix& g) {
                           const Matrix& av = t.value(a.id());
                           Matrix gi = g;
                           for (std::size_t i = 0; i < av.rows(); ++i) {
                             auto x = av.row_span(i);
                             const double n = norm2(x);
                             if (n <= cap) continue;
                             const double xg = dot(x, g.row_span(i));
                             for (std::size_t j = 0; j < av.cols(); ++j)
                               gi(i, j) = cap / n * (g(i, j) - xg / (n * n) * x[j]);
                           }
                           t.accumulate(a, gi);
                         },
                         "project_ball");
}

}  // namespace rfm::ad
