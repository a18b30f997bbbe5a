#include "rfm/polar.hpp"

#include <cmath>
#include <numbers>

namespace rfm {

PolarCoords polar_decompose(std::span<const double> v) {
  PolarCoords out;
  out.radius = norm2(v);
  out.direction.assign(v.size(), 0.0);
  if (out.radius < kZeroNorm) {
    out.radius = 0.0;
    out.degenerate = true;
    if (!v.empty()) out.direction[0] = 1.0;
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i) out.direction[i] = v[i] / out.radius;
  return out;
}

double radial_weight(std::span<const double> v) { return std::exp(-norm2(v)); }

double angular_capacity(double r, Curvature c, std::size_t d) {
  if (c.geometry() != Geometry::Hyperbolic) throw InvalidCurvature("angular capacity needs c < 0");
  if (d < 2) throw DimensionMismatch("angular capacity needs d >= 2");
  if (r < 0.0) throw DomainViolation("negative radius");
  return std::pow(std::sinh(std::sqrt(-c.value()) * r), static_cast<double>(d - 1));
}

double warping(double r, Curvature c) {
  switch (c.geometry()) {
    case Geometry::Euclidean:
      return r;
    case Geometry::Hyperbolic: {
      const double s = std::sqrt(-c.value());
      return std::sinh(s * r) / s;
    }
    case Geometry::Spherical: {
      const double s = std::sqrt(c.value());
      return std::sin(s * r) / s;
    }
  }
  return r;
}

double unit_sphere_area(std::size_t d) {
  const double h = static_cast<double>(d) / 2.0;
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  std::size_t leaves = 0;
  std::size_t max_leaves;
  bool converged = true;
};

double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole,
                       double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = st.f(lm), frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || depth >= 60) {
    ++st.leaves;
    return left + right + delta / 15.0;
  }
  if (st.leaves + 2 > st.max_leaves) {
    st.converged = false;
    ++st.leaves;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                  std::size_t max_intervals) {
  if (a == b) return {0.0, 0, true};
  SimpsonState st{f, 0, max_intervals, true};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // A coarse composite pass sets the absolute scale for the relative tolerance.
  double scale = 0.0;
  constexpr int kProbe = 64;
  for (int i = 0; i < kProbe; ++i) scale += std::abs(f(a + (b - a) * (i + 0.5) / kProbe));
  scale *= std::abs(b - a) / kProbe;
  const double tol = rel_tol * std::max(scale, std::abs(whole));
  if (tol == 0.0) return {whole, 1, true};
  QuadratureResult out;
  out.value = simpson_recurse(st, a, b, fa, fm, fb, whole, tol, 0);
  out.intervals = st.leaves;
  out.converged = st.converged;
  return out;
}

double ball_volume(double R, Curvature c, std::size_t d) {
  if (d < 1) throw DimensionMismatch("dimension must be positive");
  if (R < 0.0) throw DomainViolation("negative ball radius");
  if (R == 0.0) return 0.0;
  const double omega = unit_sphere_area(d);
  if (c.flat()) return omega * std::pow(R, static_cast<double>(d)) / static_cast<double>(d);
  if (c.geometry() == Geometry::Spherical && R > std::numbers::pi / std::sqrt(c.value()) * (1.0 + 1e-15))
    throw DomainViolation("spherical ball radius exceeds the diameter pi/sqrt(c)");
  const double power = static_cast<double>(d - 1);
  auto integrand = [&](double r) { return std::pow(warping(r, c), power); };
  const auto q = adaptive_simpson(integrand, 0.0, R, 1e-8);
  if (!q.converged) throw ConvergenceFailure("ball volume quadrature hit the subdivision cap");
  return omega * q.value;
}

double total_sphere_volume(Curvature c, std::size_t d) {
  if (c.geometry() != Geometry::Spherical) throw InvalidCurvature("total sphere volume needs c > 0");
  // S^d of radius 1/sqrt(c) has volume Omega_d c^{-d/2}, Omega_d the area of S^d in R^{d+1}.
  return unit_sphere_area(d + 1) * std::pow(c.value(), -static_cast<double>(d) / 2.0);
}

GradientSplit metric_gradient_split(const PolarCoords& x, std::span<const double> g, Curvature c) {
  if (x.degenerate || x.radius < 1e-9) throw DegenerateRadius("gradient split needs a nonzero radius");
  if (g.size() != x.direction.size()) throw DimensionMismatch("gradient and direction differ in size");
  GradientSplit out;
  out.radial = dot(g, x.direction);
  const double s = warping(x.radius, c);
  const double scale = x.radius / (s * s);
  out.angular.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out.angular[i] = scale * (g[i] - out.radial * x.direction[i]);
  return out;
}

FrameVectors frame_vectors(const PolarCoords& x, const GradientSplit& split) {
  FrameVectors out;
  out.radial.resize(x.direction.size());
  out.angular.resize(x.direction.size());
  for (std::size_t i = 0; i < x.direction.size(); ++i) {
    out.radial[i] = split.radial * x.direction[i];
    out.angular[i] = x.radius * split.angular[i];
  }
  return out;
}

Matrix polar_metric(const PolarCoords& x, Curvature c) {
  const std::size_t d = x.direction.size();
  if (x.degenerate || x.radius < 1e-9) throw DegenerateRadius("polar metric needs a nonzero radius");
  const double q = warping(x.radius, c) / x.radius;
  const double q2 = q * q;
  Matrix G(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double uu = x.direction[i] * x.direction[j];
      G(i, j) = uu + q2 * ((i == j ? 1.0 : 0.0) - uu);
    }
  return G;
}

double polar_metric_inner(const PolarCoords& x, std::span<const double> a, std::span<const double> b, Curvature c) {
  const Matrix G = polar_metric(x, c);
  double s = 0.0;
  for (std::size_t i = 0; i < G.rows(); ++i)
    for (std::size_t j = 0; j < G.cols(); ++j) s += a[i] * G(i, j) * b[j];
  return s;
}

std::vector<VolumeGrowthRow> volume_growth(Curvature c, std::size_t d, std::span<const double> radii) {
  std::vector<VolumeGrowthRow> rows;
  rows.reserve(radii.size());
  for (double R : radii) {
    VolumeGrowthRow row;
    row.radius = R;
    row.volume = ball_volume(R, c, d);
    switch (c.geometry()) {
      case Geometry::Hyperbolic:
        row.normalized = row.volume / std::exp(static_cast<double>(d - 1) * std::sqrt(-c.value()) * R);
        break;
      case Geometry::Euclidean:
        row.normalized = R > 0.0 ? row.volume / std::pow(R, static_cast<double>(d)) : 0.0;
        break;
      case Geometry::Spherical:
        row.normalized = row.volume / total_sphere_volume(c, d);
        break;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rfm
