#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance runner. Nothing here calls into the library's numerics except
// the autodiff tape whose gradients are being checked.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "rfm/autodiff/tape.hpp"
#include "rfm/graph.hpp"
#include "rfm/matrix.hpp"

namespace oracle {

using rfm::Matrix;
using rfm::Vec;

// ---- series --------------------------------------------------------------

inline double exp_series(double x) {
  // exp(x) = exp(x/2^k)^(2^k) keeps the series argument small.
  int k = 0;
  while (std::abs(x) > 0.5) {
    x /= 2.0;
    ++k;
  }
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 40; ++n) {
    term *= x / n;
    sum += term;
  }
  for (int i = 0; i < k; ++i) sum *= sum;
  return sum;
}

inline double tanh_series(double x) {
  const double e = exp_series(2.0 * x);
  return (e - 1.0) / (e + 1.0);
}

inline double sinh_series(double x) {
  double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= x * x / ((2.0 * n) * (2.0 * n + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

inline double cosh_series(double x) {
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 200; ++n) {
    term *= x * x / ((2.0 * n - 1.0) * (2.0 * n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

/// artanh(y) = sum y^(2k+1)/(2k+1), |y| < 1.
inline double artanh_series(double y) {
  double p = y, sum = 0.0;
  for (int k = 0; k < 200000; ++k) {
    const double term = p / (2.0 * k + 1.0);
    sum += term;
    if (std::abs(term) < 1e-19) break;
    p *= y * y;
  }
  return sum;
}

inline double sin_series(double x) {
  double term = x, sum = x;
  for (int n = 1; n < 60; ++n) {
    term *= -x * x / ((2.0 * n) * (2.0 * n + 1.0));
    sum += term;
  }
  return sum;
}

inline double cos_series(double x) {
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 60; ++n) {
    term *= -x * x / ((2.0 * n - 1.0) * (2.0 * n));
    sum += term;
  }
  return sum;
}

// ---- exact rationals -------------------------------------------------------

struct Rational {
  long long num = 0;
  long long den = 1;

  Rational(long long n = 0, long long d = 1) : num(n), den(d) { normalize(); }
  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
  friend Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
};

// ---- optimal transport -------------------------------------------------------

/// Minimum over all B! assignments of (1/B) sum |a_i - b_pi(i)|.
inline double brute_force_w1(const Vec& a, const Vec& b) {
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

// ---- linear algebra -----------------------------------------------------------

/// Singular values by one-sided Jacobi rotations, descending.
inline Vec jacobi_singular_values(const Matrix& a) {
  const bool wide = a.cols() > a.rows();
  Matrix u = wide ? a.transposed() : a;
  const std::size_t m = u.rows(), n = u.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (std::abs(gamma) <= 1e-300) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t), sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = u(i, p), y = u(i, q);
          u(i, p) = cs * x - sn * y;
          u(i, q) = sn * x + cs * y;
        }
      }
    if (off < 1e-15) break;
  }
  Vec s(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += u(i, j) * u(i, j);
    s[j] = std::sqrt(acc);
  }
  std::sort(s.rbegin(), s.rend());
  return s;
}

/// Characteristic polynomial coefficients (leading 1 first) by Faddeev-LeVerrier.
inline Vec characteristic_polynomial(const Matrix& a) {
  const std::size_t n = a.rows();
  Vec coeff{1.0};
  Matrix m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix am = rfm::matmul(a, m);
    for (std::size_t i = 0; i < n; ++i) am(i, i) += coeff.back();
    m = am;
    const Matrix amk = rfm::matmul(a, m);
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += amk(i, i);
    coeff.push_back(-tr / static_cast<double>(k));
  }
  return coeff;
}

/// Roots of a monic polynomial by Durand-Kerner iteration.
inline std::vector<std::complex<double>> polynomial_roots(const Vec& coeff) {
  using C = std::complex<double>;
  const std::size_t n = coeff.size() - 1;
  auto eval = [&](C z) {
    C acc = 0.0;
    for (double c : coeff) acc = acc * z + c;
    return acc;
  };
  std::vector<C> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = std::pow(C(0.4, 0.9), static_cast<double>(i));
  for (int it = 0; it < 5000; ++it) {
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      C den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= r[i] - r[j];
      const C step = eval(r[i]) / den;
      r[i] -= step;
      delta = std::max(delta, std::abs(step));
    }
    if (delta < 1e-15) break;
  }
  return r;
}

/// Greedy nearest matching of two complex multisets; returns the worst distance.
inline double multiset_distance(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const auto& p, const auto& q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

// ---- graphs --------------------------------------------------------------------

/// Plain mean-aggregation GCN: h' = act(mean_{N(i) + i} W h_j), W is out x in,
/// then a node mean. `relu_hidden` applies ReLU on every layer but the last.
inline Vec euclidean_gcn(const rfm::GraphInstance& g, const std::vector<Matrix>& weights, bool relu_hidden = true) {
  const std::size_t n = g.n_nodes;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [i, j] : g.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  Matrix h = g.node_features;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Matrix& W = weights[l];
    Matrix m(n, W.rows());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < W.rows(); ++o) {
        double acc = 0.0;
        for (std::size_t k = 0; k < W.cols(); ++k) acc += W(o, k) * h(i, k);
        m(i, o) = acc;
      }
    Matrix next(n, W.rows());
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 1.0 / static_cast<double>(adj[i].size() + 1);
      for (std::size_t o = 0; o < W.rows(); ++o) {
        double acc = m(i, o);
        for (std::size_t j : adj[i]) acc += m(j, o);
        double v = w * acc;
        if (relu_hidden && l + 1 < weights.size()) v = std::max(v, 0.0);
        next(i, o) = v;
      }
    }
    h = next;
  }
  Vec out(h.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < h.cols(); ++k) out[k] += h(i, k) / static_cast<double>(n);
  return out;
}

inline rfm::GraphInstance random_graph(std::mt19937_64& rng, std::size_t n, std::size_t features, double p) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01;
  std::vector<rfm::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u01(rng) < p) edges.emplace_back(i, j);
  Matrix x(n, features);
  for (double& v : x.data()) v = 0.5 * n01(rng);
  return rfm::make_graph(n, std::move(edges), std::move(x));
}

// ---- random helpers -----------------------------------------------------------------

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

// ---- finite differences -------------------------------------------------------------

using TapeFn = std::function<rfm::ad::Var(rfm::ad::Tape&, const std::vector<rfm::ad::Var>&)>;

/// Largest relative error, over the inputs, between the tape gradient of
/// sum(R * f(inputs)) and central differences with step h. R is a fixed
/// random weighting of the output.
inline double gradient_check(const TapeFn& f, const std::vector<Matrix>& inputs, std::uint64_t seed = 1,
                             double h = 1e-5) {
  using namespace rfm::ad;
  std::mt19937_64 rng(seed);
  Matrix weight;
  auto scalar = [&](Tape& tape, const std::vector<Var>& vars) {
    Var out = f(tape, vars);
    if (weight.empty()) weight = random_matrix(rng, out.rows(), out.cols(), 0.5, 1.5);
    return sum(mul(out, tape.constant(weight)));
  };

  Tape tape;
  std::vector<Var> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.variable(m));
  tape.backward(scalar(tape, vars));

  double worst = 0.0;
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    const Matrix g = tape.grad(vars[a]);
    Matrix fd(inputs[a].rows(), inputs[a].cols());
    for (std::size_t k = 0; k < inputs[a].size(); ++k) {
      auto eval = [&](double delta) {
        std::vector<Matrix> in = inputs;
        in[a][k] += delta;
        Tape t;
        std::vector<Var> vs;
        for (const Matrix& m : in) vs.push_back(t.constant(m));
        return scalar(t, vs).item();
      };
      fd[k] = (eval(h) - eval(-h)) / (2.0 * h);
    }
    double diff = 0.0, ng = 0.0, nf = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      diff += (g[k] - fd[k]) * (g[k] - fd[k]);
      ng += g[k] * g[k];
      nf += fd[k] * fd[k];
    }
    worst = std::max(worst, std::sqrt(diff) / std::max({std::sqrt(ng), std::sqrt(nf), 1e-8}));
  }
  return worst;
}

/// Same check for a scalar function of trainable parameters.
inline double parameter_gradient_check(const std::function<double()>& value,
                                       const std::function<void()>& backward_into_params,
                                       const std::vector<rfm::ad::Parameter*>& params, double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  backward_into_params();
  double diff = 0.0, ng = 0.0, nf = 0.0;
  for (auto* p : params) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double keep = p->value[k];
      p->value[k] = keep + h;
      const double up = value();
      p->value[k] = keep - h;
      const double down = value();
      p->value[k] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double g = p->grad[k];
      diff += (g - fd) * (g - fd);
      ng += g * g;
      nf += fd * fd;
    }
  }
  return std::sqrt(diff) / std::max({std::sqrt(ng), std::sqrt(nf), 1e-8});
}

// ---- optimizer ------------------------------------------------------------------------

/// One Adam update of a scalar, unrolled by hand.
struct ScalarAdam {
  double lr, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double x, double g) {
    ++t;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mh = m / (1.0 - std::pow(b1, t));
    const double vh = v / (1.0 - std::pow(b2, t));
    return x - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace oracle
