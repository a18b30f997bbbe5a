#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rfm/autodiff/nn.hpp"
#include "rfm/errors.hpp"
#include "rfm/manifold.hpp"

namespace rfm {

struct CouplingPlan {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (source, target), one per source in order
  std::vector<bool> fallback;                              // true when no same-class target was eligible
  std::string strategy = "class_conditional_nn";
};

/// Pairs each source with the geodesically nearest eligible target of the same
/// class. Sources whose class has no eligible target take the nearest target
/// overall and are flagged. An empty `target_eligible` means every target is
/// eligible. Ties go to the lowest target index.
CouplingPlan couple(const std::vector<ManifoldPoint>& source, const std::vector<std::size_t>& source_labels,
                    const std::vector<ManifoldPoint>& target, const std::vector<std::size_t>& target_labels,
                    const std::vector<bool>& target_eligible = {});

struct FlowSample {
  ManifoldPoint z_s;
  ManifoldPoint z_t_end;  // z_T
  double t;
  ManifoldPoint z_t;
  TangentVector u_t;
};

ManifoldPoint geodesic_interpolant(const ManifoldPoint& z_s, const ManifoldPoint& z_T, double t);
/// P_{z_S -> z_t}(Log_{z_S}(z_T)).
TangentVector target_field(const ManifoldPoint& z_s, const ManifoldPoint& z_T, double t);
FlowSample make_flow_sample(const ManifoldPoint& z_s, const ManifoldPoint& z_T, double t);

/// Mean of lambda_{z_t}^2 |v_theta(z_t, t) - u_t|^2 over the batch.
double fm_loss(ad::VectorField& field, const std::vector<FlowSample>& samples);

/// Differentiable form. z_s and z_T are B x d nodes, t is B x 1.
ad::Var fm_loss(ad::Tape& tape, ad::VectorField& field, ad::Var z_s, ad::Var z_T, ad::Var t, Curvature c);

using TangentField = std::function<Vec(const ManifoldPoint& z, double t)>;

/// Velocity that reaches `z_T` at t = 1 along the geodesic: Log_z(z_T) / (1 - t).
TangentField geodesic_field(const ManifoldPoint& z_T);
TangentField learned_field(ad::VectorField& field);

/// Raised when integration leaves the domain; carries the points computed so far.
class TransportAborted : public NumericalError {
 public:
  TransportAborted(const std::string& what, std::vector<ManifoldPoint> partial)
      : NumericalError("TransportAborted: " + what), partial_(std::move(partial)) {}
  const std::vector<ManifoldPoint>& partial() const noexcept { return partial_; }

 private:
  std::vector<ManifoldPoint> partial_;
};

/// Manifold Euler: z_{k+1} = Exp_{z_k}(v(z_k, k/N) / N). Returns N + 1 points.
std::vector<ManifoldPoint> transport_integrate(const TangentField& field, const ManifoldPoint& z0, std::size_t steps);

/// CSV with columns step, t, coord_0 .. coord_{d-1}.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<ManifoldPoint>& trajectory);

}  // namespace rfm
