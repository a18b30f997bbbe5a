#include "rfm/manifold.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rfm {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_same_curvature(const ManifoldPoint& x, const ManifoldPoint& y) {
  if (!(x.curvature() == y.curvature())) throw DomainViolation("points carry different curvatures");
  if (x.dim() != y.dim()) throw DimensionMismatch("points have different dimensions");
}

void require_base(const ManifoldPoint& x, const TangentVector& v) {
  if (!(v.base == x)) throw BaseMismatch("tangent vector is not based at the given point");
  if (v.vec.size() != x.dim()) throw DimensionMismatch("tangent vector dimension differs from point");
}

Vec scaled(std::span<const double> v, double s) {
  Vec out(v.begin(), v.end());
  for (double& x : out) x *= s;
  return out;
}

// x (+) y in raw coordinates; c is the effective curvature.
Vec mobius_add_raw(std::span<const double> x, std::span<const double> y, double c) {
  const double x2 = squared_norm(x), y2 = squared_norm(y), xy = dot(x, y);
  const double a = 1.0 - 2.0 * c * xy - c * y2;
  const double b = 1.0 + c * x2;
  const double den = 1.0 - 2.0 * c * xy + c * c * x2 * y2;
  if (!(std::abs(den) > 0.0)) throw DomainViolation("mobius addition denominator vanished");
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (a * x[i] + b * y[i]) / den;
  if (!all_finite(out)) throw DomainViolation("mobius addition produced non-finite coordinates");
  return out;
}

double lambda_raw(std::span<const double> x, double c) { return 2.0 / (1.0 + c * squared_norm(x)); }

}  // namespace

ManifoldPoint::ManifoldPoint(Vec coords, Curvature c) : coords_(std::move(coords)), c_(c) {
  if (!all_finite(coords_)) throw DomainViolation("non-finite point coordinates");
  if (-c_.effective() * squared_norm(coords_) >= 1.0)
    throw DomainViolation("point lies outside the ball -c|x|^2 < 1");
}

double tan_c(double x, Curvature c) {
  switch (c.geometry()) {
    case Geometry::Euclidean:
      return x;
    case Geometry::Hyperbolic: {
      const double s = std::sqrt(-c.value());
      return std::tanh(s * x) / s;
    }
    case Geometry::Spherical: {
      const double s = std::sqrt(c.value());
      if (s * std::abs(x) >= std::numbers::pi / 2)
        throw DomainViolation("tan_c argument beyond the injectivity radius");
      return std::tan(s * x) / s;
    }
  }
  return x;
}

double tan_c_inv(double y, Curvature c) {
  switch (c.geometry()) {
    case Geometry::Euclidean:
      return y;
    case Geometry::Hyperbolic: {
      const double s = std::sqrt(-c.value());
      if (s * std::abs(y) >= 1.0) throw DomainViolation("tan_c_inv argument outside the ball");
      return std::atanh(s * y) / s;
    }
    case Geometry::Spherical: {
      const double s = std::sqrt(c.value());
      return std::atan(s * y) / s;
    }
  }
  return y;
}

double max_norm(Curvature c) {
  if (c.geometry() != Geometry::Hyperbolic) return std::numeric_limits<double>::infinity();
  return (1.0 - kBoundaryMargin) / std::sqrt(-c.value());
}

Vec project_coords(Vec coords, Curvature c) {
  if (c.geometry() != Geometry::Hyperbolic) return coords;
  const double n = norm2(coords);
  const double cap = max_norm(c);
  if (n > cap)
    for (double& x : coords) x *= cap / n;
  return coords;
}

ManifoldPoint project(Vec coords, Curvature c) {
  if (!all_finite(coords)) throw DomainViolation("non-finite coordinates");
  return ManifoldPoint(project_coords(std::move(coords), c), c);
}

double conformal_factor(const ManifoldPoint& x) {
  return lambda_raw(x.coords(), x.curvature().effective());
}

ManifoldPoint exp_origin(std::span<const double> v, Curvature c) {
  if (!all_finite(v)) throw DomainViolation("non-finite tangent vector");
  const double n = norm2(v);
  if (n < kZeroNorm) return ManifoldPoint::origin(v.size(), c);
  return project(scaled(v, tan_c(n, c) / n), c);
}

Vec log_origin(const ManifoldPoint& y) {
  const Curvature c = y.curvature();
  const Vec p = project_coords(y.coords(), c);
  const double n = norm2(p);
  if (n < kZeroNorm) return Vec(p.size(), 0.0);
  return scaled(p, tan_c_inv(n, c) / n);
}

ManifoldPoint mobius_add(const ManifoldPoint& x, const ManifoldPoint& y) {
  require_same_curvature(x, y);
  const Curvature c = x.curvature();
  return project(mobius_add_raw(x.coords(), y.coords(), c.effective()), c);
}

ManifoldPoint mobius_neg(const ManifoldPoint& x) { return {scaled(x.coords(), -1.0), x.curvature()}; }

Vec gyration(std::span<const double> u, std::span<const double> v, std::span<const double> w, Curvature curv) {
  const double c = curv.effective();
  const double u2 = squared_norm(u), v2 = squared_norm(v), uv = dot(u, v);
  const double uw = dot(u, w), vw = dot(v, w);
  const double c2 = c * c;
  const double a = -c2 * uw * v2 - c * vw + 2.0 * c2 * uv * vw;
  const double b = -c2 * vw * u2 + c * uw;
  const double d = 1.0 - 2.0 * c * uv + c2 * u2 * v2;
  if (!(std::abs(d) > 0.0)) throw DomainViolation("gyration denominator vanished");
  Vec out(w.begin(), w.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += 2.0 * (a * u[i] + b * v[i]) / d;
  return out;
}

ManifoldPoint exp_at(const ManifoldPoint& x, const TangentVector& v) {
  require_base(x, v);
  if (!all_finite(v.vec)) throw DomainViolation("non-finite tangent vector");
  const Curvature c = x.curvature();
  const double n = norm2(v.vec);
  if (n < kZeroNorm) return x;
  const double lam = conformal_factor(x);
  const Vec step = project_coords(scaled(v.vec, tan_c(lam * n / 2.0, c) / n), c);
  return project(mobius_add_raw(x.coords(), step, c.effective()), c);
}

TangentVector log_at(const ManifoldPoint& x, const ManifoldPoint& y) {
  require_same_curvature(x, y);
  const Curvature c = x.curvature();
  const Vec xp = project_coords(x.coords(), c);
  const Vec yp = project_coords(y.coords(), c);
  const Vec w = project_coords(mobius_add_raw(scaled(xp, -1.0), yp, c.effective()), c);
  const double n = norm2(w);
  if (n < kZeroNorm) return zero_tangent(x);
  const double lam = lambda_raw(xp, c.effective());
  return {x, scaled(w, 2.0 / lam * tan_c_inv(n, c) / n)};
}

ManifoldPoint geodesic_point(const ManifoldPoint& x, const ManifoldPoint& y, double t) {
  if (t == 0.0) return x;
  if (t == 1.0) return y;
  TangentVector v = log_at(x, y);
  for (double& e : v.vec) e *= t;
  return exp_at(x, v);
}

double metric_inner(const ManifoldPoint& x, const TangentVector& u, const TangentVector& w) {
  require_base(x, u);
  require_base(x, w);
  const double lam = conformal_factor(x);
  return lam * lam * dot(u.vec, w.vec);
}

double metric_norm(const TangentVector& u) { return conformal_factor(u.base) * norm2(u.vec); }

double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y) {
  require_same_curvature(x, y);
  const Curvature c = x.curvature();
  const Vec xp = project_coords(x.coords(), c);
  const Vec yp = project_coords(y.coords(), c);
  const Vec w = project_coords(mobius_add_raw(scaled(xp, -1.0), yp, c.effective()), c);
  return 2.0 * tan_c_inv(norm2(w), c);
}

TangentVector parallel_transport(const ManifoldPoint& from, const ManifoldPoint& to, const TangentVector& v) {
  require_base(from, v);
  require_same_curvature(from, to);
  if (from == to) return {to, v.vec};
  const Curvature c = from.curvature();
  Vec out = gyration(to.coords(), scaled(from.coords(), -1.0), v.vec, c);
  const double ratio = conformal_factor(from) / conformal_factor(to);
  for (double& e : out) e *= ratio;
  return {to, std::move(out)};
}

TangentVector zero_tangent(const ManifoldPoint& x) { return {x, Vec(x.dim(), 0.0)}; }

}  // namespace rfm
