#pragma once

// Gradient-flow experiments on the flow-matching objective and their
// comparison with the bilinear adversarial game.

#include <cstdint>
#include <vector>

#include "rfm/autodiff/nn.hpp"
#include "rfm/dynamics.hpp"
#include "rfm/flow.hpp"

namespace rfm {

/// Fixed flow-matching regression problem: a small vector field and a fixed
/// set of samples on the 2-D Poincare disk.
struct FmProblem {
  ad::VectorField field;
  std::vector<FlowSample> samples;
};

FmProblem make_fm_problem(std::size_t pairs, std::vector<std::size_t> hidden, std::uint64_t seed);

Vec flatten_parameters(const std::vector<const ad::Parameter*>& params);
void assign_parameters(const std::vector<ad::Parameter*>& params, const Vec& flat);

/// -grad of fm_loss with respect to the flattened field parameters.
ParamField fm_gradient_field(FmProblem& problem);
ScalarFn fm_objective(FmProblem& problem);

struct StabilityRun {
  FlowTrajectory fm;
  FlowTrajectory adversarial;
  std::vector<double> fm_norms;   // |grad| scaled by its run maximum
  std::vector<double> adv_norms;  // |grad_theta L| scaled by its run maximum
  GradNormStats fm_stats;
  GradNormStats adv_stats;
};

/// Same dt and step count for both systems.
StabilityRun compare_stability(std::uint64_t seed, double dt, std::size_t steps);

}  // namespace rfm
