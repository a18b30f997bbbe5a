#pragma once

// Constant-curvature stereographic model. One chart covers the Poincare ball
// (c < 0), Euclidean space (c = 0) and the projected sphere (c > 0) with the
// conformal metric g_x = lambda_x^2 g_E, lambda_x = 2 / (1 + c |x|^2).

#include <cstddef>
#include <span>

#include "rfm/matrix.hpp"

namespace rfm {

enum class Geometry { Hyperbolic, Euclidean, Spherical };

/// Curvature below this magnitude is treated as flat.
inline constexpr double kFlatCurvature = 1e-12;
/// Relative distance kept from the ball boundary after every point-producing op.
inline constexpr double kBoundaryMargin = 1e-7;
/// Norms below this are a zero direction.
inline constexpr double kZeroNorm = 1e-12;

class Curvature {
 public:
  constexpr Curvature() = default;
  constexpr explicit Curvature(double c) : c_(c) {}

  constexpr double value() const noexcept { return c_; }
  constexpr Geometry geometry() const noexcept {
    if (c_ < -kFlatCurvature) return Geometry::Hyperbolic;
    if (c_ > kFlatCurvature) return Geometry::Spherical;
    return Geometry::Euclidean;
  }
  constexpr bool flat() const noexcept { return geometry() == Geometry::Euclidean; }
  /// Curvature as used inside formulas: exactly zero in the flat class.
  constexpr double effective() const noexcept { return flat() ? 0.0 : c_; }

  friend constexpr bool operator==(Curvature, Curvature) = default;

 private:
  double c_ = -1.0;
};

class ManifoldPoint {
 public:
  /// Throws DomainViolation unless -c |coords|^2 < 1 and all coords are finite.
  ManifoldPoint(Vec coords, Curvature c);

  static ManifoldPoint origin(std::size_t dim, Curvature c) { return {Vec(dim, 0.0), c}; }

  const Vec& coords() const noexcept { return coords_; }
  Curvature curvature() const noexcept { return c_; }
  std::size_t dim() const noexcept { return coords_.size(); }

  friend bool operator==(const ManifoldPoint&, const ManifoldPoint&) = default;

 private:
  Vec coords_;
  Curvature c_;
};

/// A vector in the tangent space at `base`.
struct TangentVector {
  ManifoldPoint base;
  Vec vec;
};

// Curvature trigonometry: tan_c(x) = tanh(sqrt|c| x)/sqrt|c| for c < 0,
// tan(sqrt c x)/sqrt c for c > 0, identity when flat.
double tan_c(double x, Curvature c);
double tan_c_inv(double y, Curvature c);

/// Largest admissible Euclidean norm, +inf unless hyperbolic.
double max_norm(Curvature c);
/// Scales coords back inside the ball margin (no-op unless c < 0).
Vec project_coords(Vec coords, Curvature c);
ManifoldPoint project(Vec coords, Curvature c);

double conformal_factor(const ManifoldPoint& x);

ManifoldPoint exp_origin(std::span<const double> v, Curvature c);
Vec log_origin(const ManifoldPoint& y);

ManifoldPoint mobius_add(const ManifoldPoint& x, const ManifoldPoint& y);
ManifoldPoint mobius_neg(const ManifoldPoint& x);
/// gyr[u, v] w in coordinates, for points u, v of curvature c.
Vec gyration(std::span<const double> u, std::span<const double> v, std::span<const double> w, Curvature c);

ManifoldPoint exp_at(const ManifoldPoint& x, const TangentVector& v);
TangentVector log_at(const ManifoldPoint& x, const ManifoldPoint& y);

/// Point on the geodesic Exp_x(t Log_x(y)).
ManifoldPoint geodesic_point(const ManifoldPoint& x, const ManifoldPoint& y, double t);

double metric_inner(const ManifoldPoint& x, const TangentVector& u, const TangentVector& w);
double metric_norm(const TangentVector& u);

double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y);

/// Parallel transport along the geodesic from -> to, P = (lambda_from / lambda_to) gyr[to, -from].
TangentVector parallel_transport(const ManifoldPoint& from, const ManifoldPoint& to, const TangentVector& v);

TangentVector zero_tangent(const ManifoldPoint& x);

}  // namespace rfm
