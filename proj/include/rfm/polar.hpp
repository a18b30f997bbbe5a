#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rfm/manifold.hpp"

namespace rfm {

/// Radius / direction split of an origin-tangent vector.
struct PolarCoords {
  double radius = 0.0;
  Vec direction;
  /// Set for the zero vector; direction is then the first basis vector.
  bool degenerate = false;
};

PolarCoords polar_decompose(std::span<const double> v);

/// exp(-|v|): large-radius embeddings get less say in angular alignment.
double radial_weight(std::span<const double> v);

/// sinh^{d-1}(sqrt|c| r). Requires c < 0 and d >= 2.
double angular_capacity(double r, Curvature c, std::size_t d);

/// Warping function S_c(r) of the geodesic polar metric dr^2 + S_c(r)^2 dTheta^2.
double warping(double r, Curvature c);

/// Surface area Omega_{d-1} of the unit sphere S^{d-1} in R^d.
double unit_sphere_area(std::size_t d);

/// Volume of a geodesic ball of radius R in the d-dimensional space form of curvature c.
/// Flat space uses the closed form; curved spaces integrate Omega_{d-1} S_c(r)^{d-1}.
double ball_volume(double R, Curvature c, std::size_t d);

/// Total volume of the d-dimensional sphere of curvature c > 0 (closed form).
double total_sphere_volume(Curvature c, std::size_t d);

struct QuadratureResult {
  double value = 0.0;
  std::size_t intervals = 0;
  bool converged = true;
};

/// Adaptive Simpson on [a, b] to relative tolerance `rel_tol`, at most `max_intervals` leaves.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-8, std::size_t max_intervals = std::size_t{1} << 20);

/// Riemannian gradient of a loss at polar point (r, u), split into the radial scalar
/// dL/dr and the angular part S_c(r)^{-2} r (g - <g,u>u) in sphere-tangent coordinates.
struct GradientSplit {
  double radial = 0.0;
  Vec angular;
};

GradientSplit metric_gradient_split(const PolarCoords& x, std::span<const double> euclidean_grad, Curvature c);

/// The two components as displacement vectors in origin-tangent coordinates.
struct FrameVectors {
  Vec radial;
  Vec angular;
};

FrameVectors frame_vectors(const PolarCoords& x, const GradientSplit& split);

/// Full warped-product metric in origin-tangent coordinates at radius r, direction u:
/// u u^T + (S_c(r)/r)^2 (I - u u^T).
Matrix polar_metric(const PolarCoords& x, Curvature c);

/// a^T G b with G from polar_metric.
double polar_metric_inner(const PolarCoords& x, std::span<const double> a, std::span<const double> b, Curvature c);

struct VolumeGrowthRow {
  double radius = 0.0;
  double volume = 0.0;
  /// volume normalized by the growth law of the curvature class: e^{(d-1)sqrt|c|R},
  /// R^d, or the total sphere volume.
  double normalized = 0.0;
};

std::vector<VolumeGrowthRow> volume_growth(Curvature c, std::size_t d, std::span<const double> radii);

}  // namespace rfm
