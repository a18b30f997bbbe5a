#include "rfm/geometry_suite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rfm/errors.hpp"
#include "rfm/polar.hpp"

namespace rfm {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Vec direction(std::size_t d) {
    Vec v(d);
    double n = 0.0;
    do {
      for (double& x : v) x = n01_(rng_);
      n = norm2(v);
    } while (n < 1e-3);
    for (double& x : v) x /= n;
    return v;
  }

  Vec tangent(std::size_t d, double max_norm) {
    Vec v = direction(d);
    const double r = max_norm * uniform(0.0, 1.0);
    for (double& x : v) x *= r;
    return v;
  }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  std::size_t dim(std::size_t fixed) {
    return fixed ? fixed : std::uniform_int_distribution<std::size_t>(2, 6)(rng_);
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> n01_;
};

struct Tally {
  InvariantResult r;
  Tally(std::string name, double tol) {
    r.name = std::move(name);
    r.tolerance = tol;
  }
  void add(double err) {
    ++r.cases;
    if (!(err <= r.tolerance)) ++r.failures;
    if (std::isnan(err) || err > r.max_error) r.max_error = std::isnan(err) ? INFINITY : err;
  }
};

double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Point radius bound: origin distance at most 3, and on the sphere closer than
/// a quarter circumference so no pair is antipodal.
double point_tangent_bound(Curvature c) {
  if (c.geometry() == Geometry::Spherical) return std::min(1.5, 0.7 * std::numbers::pi / (4.0 * std::sqrt(c.value())));
  return 1.5;
}

}  // namespace

double sample_tangent_bound(Curvature c) {
  if (c.geometry() == Geometry::Spherical)
    return std::min(2.0, 0.95 * std::numbers::pi / (2.0 * std::sqrt(c.value())));
  return 2.0;
}

std::vector<InvariantResult> run_geometry_suite(Curvature c, std::size_t dim, std::size_t cases, std::uint64_t seed) {
  Sampler s(seed);
  Tally round_trip("exp_log_round_trip", 1e-8);
  Tally endpoints("geodesic_endpoints", 0.0);
  Tally proportional("geodesic_proportionality", 1e-7);
  Tally isometry("transport_isometry", 1e-9);
  Tally symmetry("distance_symmetry_positivity", 1e-10);
  Tally euclid("euclidean_limit", 1e-5);
  Tally clean("no_numerical_errors", 0.0);
  const bool near_flat = std::abs(c.value()) <= 1e-6;
  const double tb = sample_tangent_bound(c), pb = point_tangent_bound(c);

  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t d = s.dim(dim);
    try {
      const Vec v = s.tangent(d, tb);
      round_trip.add(max_abs_diff(log_origin(exp_origin(v, c)), v));

      const ManifoldPoint x = exp_origin(s.tangent(d, pb), c);
      const ManifoldPoint y = exp_origin(s.tangent(d, pb), c);
      const bool exact = geodesic_point(x, y, 0.0) == x && geodesic_point(x, y, 1.0) == y;
      endpoints.add(exact ? 0.0 : 1.0);
      const double dxy = geodesic_distance(x, y);
      for (double t : {0.25, 0.5, 0.75}) proportional.add(std::abs(geodesic_distance(x, geodesic_point(x, y, t)) - t * dxy));

      const double dyx = geodesic_distance(y, x);
      symmetry.add(dxy > 0.0 || x == y ? rel_diff(dxy, dyx) : INFINITY);

      const TangentVector w{x, s.tangent(d, 1.0)};
      const TangentVector pw = parallel_transport(x, y, w);
      isometry.add(rel_diff(metric_norm(pw), metric_norm(w)));

      if (near_flat) {
        const Vec& xc = x.coords();
        const Vec& yc = y.coords();
        Vec sum(d), diff(d), step(d);
        for (std::size_t i = 0; i < d; ++i) {
          sum[i] = xc[i] + yc[i];
          diff[i] = yc[i] - xc[i];
          step[i] = xc[i] + w.vec[i];
        }
        auto rel_vec = [](const Vec& a, const Vec& b) {
          Vec e(a.size());
          for (std::size_t i = 0; i < a.size(); ++i) e[i] = a[i] - b[i];
          return norm2(e) / std::max(norm2(b), 1e-12);
        };
        euclid.add(rel_vec(exp_at(x, w).coords(), step));
        euclid.add(rel_vec(log_at(x, y).vec, diff));
        euclid.add(rel_vec(mobius_add(x, y).coords(), sum));
        euclid.add(std::abs(dxy - 2.0 * norm2(diff)) / std::max(2.0 * norm2(diff), 1e-12));
      }
      clean.add(0.0);
    } catch (const Error&) {
      clean.add(1.0);
    }
  }
  std::vector<InvariantResult> out{round_trip.r, endpoints.r, proportional.r, isometry.r, symmetry.r, clean.r};
  if (near_flat) out.push_back(euclid.r);
  return out;
}

std::vector<InvariantResult> run_polar_suite(Curvature c, std::size_t dim, std::size_t cases, std::uint64_t seed) {
  Sampler s(seed);
  Tally ortho("polar_metric_orthogonality", 1e-10);
  Tally capacity("angular_capacity_law", 1e-10);
  Tally monotone("angular_capacity_increasing", 0.0);
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t d = std::max<std::size_t>(s.dim(dim), 2);
    const Vec v = s.tangent(d, 3.0);
    const PolarCoords x = polar_decompose(v);
    if (x.radius < 1e-6) continue;
    const Vec g = s.tangent(d, 1.0);
    try {
      const FrameVectors f = frame_vectors(x, metric_gradient_split(x, g, c));
      ortho.add(std::abs(polar_metric_inner(x, f.radial, f.angular, c)));
    } catch (const Error&) {
      ortho.add(INFINITY);
    }
    if (c.geometry() == Geometry::Hyperbolic) {
      const double r = x.radius;
      const double k_ = std::sqrt(-c.value());
      const double sh = 0.5 * (std::exp(k_ * r) - std::exp(-k_ * r));
      const double expect = std::pow(sh, static_cast<double>(d - 1));
      capacity.add(std::abs(angular_capacity(r, c, d) - expect) / std::max(1.0, expect));
      const double r2 = r + s.uniform(1e-3, 1.0);
      monotone.add(angular_capacity(r2, c, d) > angular_capacity(r, c, d) ? 0.0 : 1.0);
    }
  }
  std::vector<InvariantResult> out{ortho.r};
  if (c.geometry() == Geometry::Hyperbolic) {
    out.push_back(capacity.r);
    out.push_back(monotone.r);
  }
  return out;
}

}  // namespace rfm
