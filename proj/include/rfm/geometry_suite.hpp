#pragma once

// Seeded invariant checks over the manifold and polar modules, shared by the
// `geom-check` CLI command and the acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

#include "rfm/manifold.hpp"

namespace rfm {

struct InvariantResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  double tolerance = 0.0;

  bool passed() const noexcept { return cases > 0 && failures == 0; }
};

/// Largest origin-tangent norm sampled for curvature c: 2, or less on the
/// sphere so that exp_origin stays inside the injectivity radius.
double sample_tangent_bound(Curvature c);

/// Round trip, geodesic proportionality and endpoints, transport isometry,
/// distance symmetry/positivity, and (for |c| <= 1e-6) Euclidean agreement.
/// `dim` = 0 cycles dimensions 2..6.
std::vector<InvariantResult> run_geometry_suite(Curvature c, std::size_t dim, std::size_t cases, std::uint64_t seed);

/// Metric orthogonality of the polar gradient frame and, for c < 0, the
/// angular capacity law.
std::vector<InvariantResult> run_polar_suite(Curvature c, std::size_t dim, std::size_t cases, std::uint64_t seed);

}  // namespace rfm
