#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rfm/eigen.hpp"
#include "rfm/errors.hpp"
#include "rfm/matrix.hpp"

namespace rfm {

/// Two-player game with loss L = theta^T K phi + (s/2)(theta^T H_tt theta - phi^T H_pp phi).
/// Empty self blocks count as zero.
struct GameState {
  Vec theta;
  Vec phi;
  Matrix interaction;  // K, n x m
  Matrix self_theta;   // H_tt, n x n or empty
  Matrix self_phi;     // H_pp, m x m or empty
};

/// [[s H_tt, K], [-K^T, s H_pp]].
Matrix minimax_jacobian(const GameState& state, double self_curvature_scale);

using ParamField = std::function<Vec(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

struct FlowTrajectory {
  double dt = 0.0;
  std::vector<Vec> states;          // steps + 1
  std::vector<double> losses;       // L at each state
  std::vector<double> field_norms;  // |field| at each state
};

class FlowAborted : public NumericalError {
 public:
  FlowAborted(const std::string& what, FlowTrajectory partial)
      : NumericalError("FlowAborted: " + what), partial_(std::move(partial)) {}
  const FlowTrajectory& partial() const noexcept { return partial_; }

 private:
  FlowTrajectory partial_;
};

/// Explicit Euler x_{k+1} = x_k + dt field(x_k).
FlowTrajectory simulate_flow(const ParamField& field, const ScalarFn& loss, Vec x0, double dt, std::size_t steps);

struct LyapunovReport {
  bool monotone = true;
  std::vector<std::size_t> violations;  // k with L_{k+1} - L_k > tolerance
  std::vector<double> residuals;        // (L_{k+1} - L_k)/dt + |grad L_k|^2
  double tolerance = 0.0;               // 10 dt^2 max|grad L| Lip
  double max_abs_residual = 0.0;
  double residual_bound = 0.0;          // dt Lip max|grad L|^2
  bool residual_ok = true;
};

/// Field norms are read as |grad L|, which holds for gradient flows.
LyapunovReport lyapunov_monitor(const FlowTrajectory& traj, double lipschitz);

/// Largest secant ratio |g_{k+1} - g_k| / |x_{k+1} - x_k| along a gradient-flow trajectory.
double secant_lipschitz(const FlowTrajectory& traj, const ParamField& field);

struct GradNormStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Population mean and variance. Throws EmptyLog.
GradNormStats grad_norm_stats(std::span<const double> norms);

// Ready-made systems over the stacked vector (theta, phi).
ParamField adversarial_field(const GameState& game, double self_curvature_scale);
ScalarFn game_loss(const GameState& game, double self_curvature_scale);
/// |grad_theta L| at a stacked state.
double generator_grad_norm(const GameState& game, double self_curvature_scale, const Vec& state);

/// Random n x m matrix with entries in [-1, 1].
Matrix random_interaction(std::size_t n, std::size_t m, std::uint64_t seed);

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report);
/// Columns step, loss, grad_norm, x_0 .. x_{p-1}.
void write_flow_csv(const std::filesystem::path& path, const FlowTrajectory& traj);

}  // namespace rfm
