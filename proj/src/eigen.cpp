#include "rfm/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfm/errors.hpp"

namespace rfm {

namespace {

void check_input(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("eigenvalues need a square matrix");
  if (a.rows() > kMaxEigenDim) throw DimensionMismatch("eigen solver is limited to n <= 64");
  for (double x : a.data())
    if (!std::isfinite(x)) throw NonFinite("matrix has a non-finite entry");
}

}  // namespace

Matrix hessenberg(const Matrix& a) {
  check_input(a);
  Matrix H = a;
  const std::size_t n = a.rows();
  if (n < 3) return H;
  std::vector<double> ort(n, 0.0);
  const std::size_t high = n - 1;
  for (std::size_t m = 1; m + 1 <= high; ++m) {
    double scale = 0.0;
    for (std::size_t i = m; i <= high; ++i) scale += std::abs(H(i, m - 1));
    if (scale == 0.0) continue;
    double h = 0.0;
    for (std::size_t i = high + 1; i-- > m;) {
      ort[i] = H(i, m - 1) / scale;
      h += ort[i] * ort[i];
    }
    double g = std::sqrt(h);
    if (ort[m] > 0) g = -g;
    h -= ort[m] * g;
    ort[m] -= g;
    for (std::size_t j = m; j < n; ++j) {
      double f = 0.0;
      for (std::size_t i = high + 1; i-- > m;) f += ort[i] * H(i, j);
      f /= h;
      for (std::size_t i = m; i <= high; ++i) H(i, j) -= f * ort[i];
    }
    for (std::size_t i = 0; i <= high; ++i) {
      double f = 0.0;
      for (std::size_t j = high + 1; j-- > m;) f += ort[j] * H(i, j);
      f /= h;
      for (std::size_t j = m; j <= high; ++j) H(i, j) -= f * ort[j];
    }
    H(m, m - 1) = scale * g;
    for (std::size_t i = m + 1; i <= high; ++i) H(i, m - 1) = 0.0;
  }
  return H;
}

SpectrumReport eigen_spectrum(const Matrix& a) {
  Matrix H = hessenberg(a);
  const int nn = static_cast<int>(a.rows());
  std::vector<double> d(static_cast<std::size_t>(nn), 0.0), e(static_cast<std::size_t>(nn), 0.0);
  auto at = [&H](int i, int j) -> double& { return H(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };

  const double eps = std::numeric_limits<double>::epsilon();
  double norm = 0.0;
  for (int i = 0; i < nn; ++i)
    for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(at(i, j));

  int n = nn - 1;
  const int low = 0;
  double exshift = 0.0, p = 0, q = 0, r = 0, s = 0, z = 0, w, x, y;
  int iter = 0, total_iter = 0;

  while (n >= low) {
    int l = n;
    while (l > low) {
      s = std::abs(at(l - 1, l - 1)) + std::abs(at(l, l));
      if (s == 0.0) s = norm;
      if (std::abs(at(l, l - 1)) < eps * s) break;
      --l;
    }

    if (l == n) {
      at(n, n) += exshift;
      d[n] = at(n, n);
      e[n] = 0.0;
      --n;
      iter = 0;
    } else if (l == n - 1) {
      w = at(n, n - 1) * at(n - 1, n);
      p = (at(n - 1, n - 1) - at(n, n)) / 2.0;
      q = p * p + w;
      z = std::sqrt(std::abs(q));
      at(n, n) += exshift;
      at(n - 1, n - 1) += exshift;
      x = at(n, n);
      if (q >= 0) {
        z = p >= 0 ? p + z : p - z;
        d[n - 1] = x + z;
        d[n] = d[n - 1];
        if (z != 0.0) d[n] = x - w / z;
        e[n - 1] = 0.0;
        e[n] = 0.0;
        x = at(n, n - 1);
        s = std::abs(x) + std::abs(z);
        p = x / s;
        q = z / s;
        r = std::sqrt(p * p + q * q);
        p /= r;
        q /= r;
        for (int j = n - 1; j < nn; ++j) {
          z = at(n - 1, j);
          at(n - 1, j) = q * z + p * at(n, j);
          at(n, j) = q * at(n, j) - p * z;
        }
        for (int i = 0; i <= n; ++i) {
          z = at(i, n - 1);
          at(i, n - 1) = q * z + p * at(i, n);
          at(i, n) = q * at(i, n) - p * z;
        }
      } else {
        d[n - 1] = x + p;
        d[n] = x + p;
        e[n - 1] = z;
        e[n] = -z;
      }
      n -= 2;
      iter = 0;
    } else {
      x = at(n, n);
      y = 0.0;
      w = 0.0;
      if (l < n) {
        y = at(n - 1, n - 1);
        w = at(n, n - 1) * at(n - 1, n);
      }
      if (iter == 10) {
        exshift += x;
        for (int i = low; i <= n; ++i) at(i, i) -= x;
        s = std::abs(at(n, n - 1)) + std::abs(at(n - 1, n - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      if (iter == 30) {
        s = (y - x) / 2.0;
        s = s * s + w;
        if (s > 0) {
          s = std::sqrt(s);
          if (y < x) s = -s;
          s = x - w / ((y - x) / 2.0 + s);
          for (int i = low; i <= n; ++i) at(i, i) -= s;
          exshift += s;
          x = y = w = 0.964;
        }
      }
      ++iter;
      if (++total_iter > kMaxQrIterations)
        throw ConvergenceFailure("QR iteration did not converge in " + std::to_string(kMaxQrIterations) + " sweeps");

      int m = n - 2;
      while (m >= l) {
        z = at(m, m);
        r = x - z;
        s = y - z;
        p = (r * s - w) / at(m + 1, m) + at(m, m + 1);
        q = at(m + 1, m + 1) - z - r - s;
        r = at(m + 2, m + 1);
        s = std::abs(p) + std::abs(q) + std::abs(r);
        p /= s;
        q /= s;
        r /= s;
        if (m == l) break;
        if (std::abs(at(m, m - 1)) * (std::abs(q) + std::abs(r)) <
            eps * (std::abs(p) * (std::abs(at(m - 1, m - 1)) + std::abs(z) + std::abs(at(m + 1, m + 1)))))
          break;
        --m;
      }
      for (int i = m + 2; i <= n; ++i) {
        at(i, i - 2) = 0.0;
        if (i > m + 2) at(i, i - 3) = 0.0;
      }

      for (int k = m; k <= n - 1; ++k) {
        const bool notlast = k != n - 1;
        if (k != m) {
          p = at(k, k - 1);
          q = at(k + 1, k - 1);
          r = notlast ? at(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        s = std::sqrt(p * p + q * q + r * r);
        if (p < 0) s = -s;
        if (s == 0.0) continue;
        if (k != m)
          at(k, k - 1) = -s * x;
        else if (l != m)
          at(k, k - 1) = -at(k, k - 1);
        p += s;
        x = p / s;
        y = q / s;
        z = r / s;
        q /= p;
        r /= p;
        for (int j = k; j < nn; ++j) {
          p = at(k, j) + q * at(k + 1, j);
          if (notlast) {
            p += r * at(k + 2, j);
            at(k + 2, j) -= p * z;
          }
          at(k, j) -= p * x;
          at(k + 1, j) -= p * y;
        }
        for (int i = 0; i <= std::min(n, k + 3); ++i) {
          p = x * at(i, k) + y * at(i, k + 1);
          if (notlast) {
            p += z * at(i, k + 2);
            at(i, k + 2) -= p * r;
          }
          at(i, k) -= p;
          at(i, k + 1) -= p * q;
        }
      }
    }
  }

  SpectrumReport rep;
  for (int i = 0; i < nn; ++i) {
    rep.eigenvalues.emplace_back(d[i], e[i]);
    rep.max_abs_real_part = std::max(rep.max_abs_real_part, std::abs(d[i]));
    if (e[i] != 0.0) rep.any_nonzero_imag = true;
  }
  return rep;
}

}  // namespace rfm
