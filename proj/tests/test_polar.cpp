#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rfm/geometry_suite.hpp"
#include "rfm/polar.hpp"

using namespace rfm;

namespace {

const double kPi = std::numbers::pi;

double cosh_o(double x) { return oracle::cosh_series(x); }
double sinh_o(double x) { return oracle::sinh_series(x); }

}  // namespace

TEST_CASE("polar decomposition") {
  const auto p = polar_decompose(Vec{3.0, 4.0});
  CHECK(p.radius == 5.0);
  CHECK(std::abs(p.direction[0] - 0.6) < 1e-15);
  CHECK(std::abs(p.direction[1] - 0.8) < 1e-15);
  CHECK_FALSE(p.degenerate);

  const auto z = polar_decompose(Vec{0.0, 0.0, 0.0});
  CHECK(z.degenerate);
  CHECK(z.radius == 0.0);
  CHECK(z.direction == Vec{1.0, 0.0, 0.0});

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 100; ++i) {
    Vec v(4);
    for (double& x : v) x = n01(rng);
    const auto q = polar_decompose(v);
    CHECK(std::abs(norm2(q.direction) - 1.0) < 1e-14);
    for (std::size_t j = 0; j < v.size(); ++j) CHECK(std::abs(q.radius * q.direction[j] - v[j]) < 1e-14);
  }
}

TEST_CASE("radial weight") {
  CHECK(radial_weight(Vec{0.0, 0.0}) == 1.0);
  CHECK(std::abs(radial_weight(Vec{3.0, 4.0}) - 1.0 / oracle::exp_series(5.0)) < 1e-15);
}

TEST_CASE("angular capacity") {
  const Curvature h(-1.0);
  CHECK(std::abs(angular_capacity(1.0, h, 2) - sinh_o(1.0)) < 1e-12);
  CHECK(std::abs(angular_capacity(1.0, h, 3) - sinh_o(1.0) * sinh_o(1.0)) < 1e-12);
  CHECK(std::abs(angular_capacity(0.5, Curvature(-4.0), 3) - sinh_o(1.0) * sinh_o(1.0)) < 1e-12);
  CHECK(angular_capacity(0.0, h, 3) == 0.0);
  CHECK_THROWS_AS(angular_capacity(1.0, Curvature(0.5), 3), InvalidCurvature);
  CHECK_THROWS_AS(angular_capacity(1.0, Curvature(0.0), 3), InvalidCurvature);

  double prev = 0.0;
  for (double r = 0.05; r < 6.0; r += 0.05) {
    const double a = angular_capacity(r, h, 4);
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("warping function") {
  CHECK(warping(0.7, Curvature(0.0)) == 0.7);
  CHECK(std::abs(warping(0.7, Curvature(-1.0)) - sinh_o(0.7)) < 1e-14);
  CHECK(std::abs(warping(0.7, Curvature(1.0)) - oracle::sin_series(0.7)) < 1e-14);
  CHECK(std::abs(warping(0.7, Curvature(-4.0)) - sinh_o(1.4) / 2.0) < 1e-14);
}

TEST_CASE("unit sphere areas") {
  CHECK(std::abs(unit_sphere_area(1) - 2.0) < 1e-14);
  CHECK(std::abs(unit_sphere_area(2) - 2.0 * kPi) < 1e-14);
  CHECK(std::abs(unit_sphere_area(3) - 4.0 * kPi) < 1e-13);
  CHECK(std::abs(unit_sphere_area(4) - 2.0 * kPi * kPi) < 1e-13);
}

TEST_CASE("adaptive simpson") {
  const auto q = adaptive_simpson([](double x) { return x * x; }, 0.0, 3.0);
  CHECK(std::abs(q.value - 9.0) < 1e-12);
  CHECK(q.converged);
  const auto e = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(e.value - (oracle::exp_series(1.0) - 1.0)) < 1e-11);
  CHECK(adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
  const auto capped = adaptive_simpson([](double x) { return std::sin(200.0 * x); }, 0.0, 10.0, 1e-14, 4);
  CHECK_FALSE(capped.converged);
}

TEST_CASE("ball volumes against closed forms") {
  // Flat
  CHECK(std::abs(ball_volume(2.0, Curvature(0.0), 2) - 4.0 * kPi) < 1e-12);
  CHECK(std::abs(ball_volume(1.0, Curvature(0.0), 3) - 4.0 * kPi / 3.0) < 1e-12);
  // Hyperbolic plane: 2 pi (cosh R - 1)
  for (double R : {0.5, 1.0, 2.0, 5.0}) {
    const double want = 2.0 * kPi * (cosh_o(R) - 1.0);
    CHECK(std::abs(ball_volume(R, Curvature(-1.0), 2) - want) < 1e-7 * want);
  }
  CHECK(std::abs(ball_volume(2.0, Curvature(-1.0), 2) - 17.3554) < 1e-4);
  // Hyperbolic 3-space: pi (sinh 2R - 2R)
  for (double R : {0.5, 1.0, 3.0}) {
    const double want = kPi * (sinh_o(2.0 * R) - 2.0 * R);
    CHECK(std::abs(ball_volume(R, Curvature(-1.0), 3) - want) < 1e-7 * want);
  }
  // Round sphere: 2 pi (1 - cos R)
  for (double R : {0.5, 1.5, kPi}) {
    const double want = 2.0 * kPi * (1.0 - oracle::cos_series(R));
    CHECK(std::abs(ball_volume(R, Curvature(1.0), 2) - want) < 1e-7 * want);
  }
  CHECK(ball_volume(0.0, Curvature(-1.0), 3) == 0.0);
  CHECK_THROWS_AS(ball_volume(-1.0, Curvature(-1.0), 3), DomainViolation);
  CHECK_THROWS_AS(ball_volume(4.0, Curvature(1.0), 2), DomainViolation);
  CHECK_THROWS_AS(ball_volume(1.0, Curvature(-1.0), 0), DimensionMismatch);
}

TEST_CASE("total sphere volume") {
  CHECK(std::abs(total_sphere_volume(Curvature(1.0), 2) - 4.0 * kPi) < 1e-12);
  CHECK(std::abs(total_sphere_volume(Curvature(4.0), 2) - kPi) < 1e-12);
  CHECK(std::abs(ball_volume(kPi, Curvature(1.0), 3) - total_sphere_volume(Curvature(1.0), 3)) < 1e-6);
  CHECK_THROWS_AS(total_sphere_volume(Curvature(-1.0), 2), InvalidCurvature);
}

TEST_CASE("gradient split") {
  const auto x = polar_decompose(Vec{1.0, 0.0});
  const auto split = metric_gradient_split(x, Vec{2.0, 3.0}, Curvature(-1.0));
  CHECK(split.radial == 2.0);
  const double s = sinh_o(1.0);
  CHECK(std::abs(split.angular[0]) < 1e-15);
  CHECK(std::abs(split.angular[1] - 3.0 / (s * s)) < 1e-12);

  const auto flat = metric_gradient_split(polar_decompose(Vec{0.0, 2.0}), Vec{1.0, 1.0}, Curvature(0.0));
  CHECK(flat.radial == 1.0);
  CHECK(std::abs(flat.angular[0] - 0.5) < 1e-15);

  CHECK_THROWS_AS(metric_gradient_split(polar_decompose(Vec{0.0, 0.0}), Vec{1.0, 1.0}, Curvature(-1.0)),
                  DegenerateRadius);
  CHECK_THROWS_AS(metric_gradient_split(x, Vec{1.0, 1.0, 1.0}, Curvature(-1.0)), DimensionMismatch);
}

TEST_CASE("polar metric") {
  const auto x = polar_decompose(Vec{0.0, 1.0});
  const Matrix G = polar_metric(x, Curvature(-1.0));
  const double s = sinh_o(1.0);
  CHECK(std::abs(G(0, 0) - s * s) < 1e-12);
  CHECK(std::abs(G(1, 1) - 1.0) < 1e-15);
  CHECK(std::abs(G(0, 1)) < 1e-15);
  const Matrix I = polar_metric(x, Curvature(0.0));
  CHECK(std::abs(I(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("radial and angular components are metric orthogonal") {
  for (double c : {-2.0, -1.0, 0.0, 0.5}) {
    for (const auto& r : run_polar_suite(Curvature(c), 0, 300, 13)) {
      INFO("c = " << c << " " << r.name << " max_err = " << r.max_error);
      CHECK(r.passed());
    }
  }
}

TEST_CASE("volume growth normalization") {
  const Vec radii{1.0, 2.0, 4.0};
  const auto e = volume_growth(Curvature(0.0), 3, radii);
  for (const auto& r : e) CHECK(std::abs(r.normalized - 4.0 * kPi / 3.0) < 1e-10);
  const auto s = volume_growth(Curvature(1.0), 2, Vec{kPi});
  CHECK(std::abs(s[0].normalized - 1.0) < 1e-7);
  const auto h = volume_growth(Curvature(-1.0), 2, Vec{6.0, 8.0});
  CHECK(std::abs(h[0].normalized / h[1].normalized - 1.0) < 0.02);
}
