#include "rfm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace rfm {

namespace {

void check_game(const GameState& g) {
  const std::size_t n = g.interaction.rows(), m = g.interaction.cols();
  if (g.theta.size() != n || g.phi.size() != m)
    throw ShapeMismatch("theta/phi sizes do not match the interaction matrix");
  if (!g.self_theta.empty() && (g.self_theta.rows() != n || g.self_theta.cols() != n))
    throw ShapeMismatch("self_theta must be n x n");
  if (!g.self_phi.empty() && (g.self_phi.rows() != m || g.self_phi.cols() != m))
    throw ShapeMismatch("self_phi must be m x m");
}

/// (grad_theta L, grad_phi L) at the stacked state.
std::pair<Vec, Vec> game_grads(const GameState& g, double s, const Vec& x) {
  const std::size_t n = g.interaction.rows(), m = g.interaction.cols();
  if (x.size() != n + m) throw DimensionMismatch("state size differs from n + m");
  Vec gt(n, 0.0), gp(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      gt[i] += g.interaction(i, j) * x[n + j];
      gp[j] += g.interaction(i, j) * x[i];
    }
  if (!g.self_theta.empty())
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) gt[i] += s * g.self_theta(i, j) * x[j];
  if (!g.self_phi.empty())
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) gp[i] -= s * g.self_phi(i, j) * x[n + j];
  return {gt, gp};
}

}  // namespace

Matrix minimax_jacobian(const GameState& state, double self_curvature_scale) {
  check_game(state);
  const std::size_t n = state.interaction.rows(), m = state.interaction.cols();
  Matrix J(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      J(i, n + j) = state.interaction(i, j);
      J(n + j, i) = -state.interaction(i, j);
    }
  if (!state.self_theta.empty())
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) J(i, j) = self_curvature_scale * state.self_theta(i, j);
  if (!state.self_phi.empty())
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) J(n + i, n + j) = self_curvature_scale * state.self_phi(i, j);
  return J;
}

FlowTrajectory simulate_flow(const ParamField& field, const ScalarFn& loss, Vec x0, double dt, std::size_t steps) {
  if (!(dt > 0.0)) throw InvalidSpec("dt must be positive");
  FlowTrajectory tr;
  tr.dt = dt;
  Vec x = std::move(x0);
  for (std::size_t k = 0;; ++k) {
    Vec f = field(x);
    if (f.size() != x.size()) throw DimensionMismatch("field output size differs from the state");
    const double L = loss(x);
    const double nf = norm2(f);
    if (!std::isfinite(L) || !std::isfinite(nf)) throw FlowAborted("non-finite value at step " + std::to_string(k), tr);
    tr.states.push_back(x);
    tr.losses.push_back(L);
    tr.field_norms.push_back(nf);
    if (k == steps) break;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * f[i];
  }
  return tr;
}

LyapunovReport lyapunov_monitor(const FlowTrajectory& traj, double lipschitz) {
  LyapunovReport rep;
  if (traj.losses.size() < 2) return rep;
  const double gmax = *std::max_element(traj.field_norms.begin(), traj.field_norms.end());
  rep.tolerance = 10.0 * traj.dt * traj.dt * gmax * lipschitz;
  rep.residual_bound = traj.dt * lipschitz * gmax * gmax;
  for (std::size_t k = 0; k + 1 < traj.losses.size(); ++k) {
    const double dl = traj.losses[k + 1] - traj.losses[k];
    if (dl > rep.tolerance) {
      rep.monotone = false;
      rep.violations.push_back(k);
    }
    const double res = dl / traj.dt + traj.field_norms[k] * traj.field_norms[k];
    rep.residuals.push_back(res);
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(res));
  }
  rep.residual_ok = rep.max_abs_residual <= rep.residual_bound;
  return rep;
}

double secant_lipschitz(const FlowTrajectory& traj, const ParamField& field) {
  double lip = 0.0;
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const Vec g0 = field(traj.states[k]);
    const Vec g1 = field(traj.states[k + 1]);
    double dg = 0.0, dx = 0.0;
    for (std::size_t i = 0; i < g0.size(); ++i) {
      dg += (g1[i] - g0[i]) * (g1[i] - g0[i]);
      const double d = traj.states[k + 1][i] - traj.states[k][i];
      dx += d * d;
    }
    if (dx > 0.0) lip = std::max(lip, std::sqrt(dg / dx));
  }
  return lip;
}

GradNormStats grad_norm_stats(std::span<const double> norms) {
  if (norms.empty()) throw EmptyLog("no gradient norms recorded");
  GradNormStats s;
  for (double x : norms) s.mean += x;
  s.mean /= static_cast<double>(norms.size());
  for (double x : norms) s.variance += (x - s.mean) * (x - s.mean);
  s.variance /= static_cast<double>(norms.size());
  return s;
}

ParamField adversarial_field(const GameState& game, double self_curvature_scale) {
  check_game(game);
  return [game, self_curvature_scale](const Vec& x) {
    auto [gt, gp] = game_grads(game, self_curvature_scale, x);
    Vec f;
    f.reserve(x.size());
    for (double v : gt) f.push_back(-v);
    for (double v : gp) f.push_back(v);
    return f;
  };
}

ScalarFn game_loss(const GameState& game, double self_curvature_scale) {
  check_game(game);
  return [game, self_curvature_scale](const Vec& x) {
    const std::size_t n = game.interaction.rows(), m = game.interaction.cols();
    if (x.size() != n + m) throw DimensionMismatch("state size differs from n + m");
    double L = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) L += x[i] * game.interaction(i, j) * x[n + j];
    if (!game.self_theta.empty())
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) L += 0.5 * self_curvature_scale * x[i] * game.self_theta(i, j) * x[j];
    if (!game.self_phi.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) L -= 0.5 * self_curvature_scale * x[n + i] * game.self_phi(i, j) * x[n + j];
    return L;
  };
}

double generator_grad_norm(const GameState& game, double self_curvature_scale, const Vec& state) {
  return norm2(game_grads(game, self_curvature_scale, state).first);
}

Matrix random_interaction(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix k(n, m);
  for (double& x : k.data()) x = u(rng);
  return k;
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string());
  os.precision(12);
  os << "index,real,imag\n";
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i)
    os << i << ',' << report.eigenvalues[i].real() << ',' << report.eigenvalues[i].imag() << '\n';
}

void write_flow_csv(const std::filesystem::path& path, const FlowTrajectory& traj) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string());
  os.precision(12);
  const std::size_t p = traj.states.empty() ? 0 : traj.states.front().size();
  os << "step,loss,grad_norm";
  for (std::size_t i = 0; i < p; ++i) os << ",x_" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << k << ',' << traj.losses[k] << ',' << traj.field_norms[k];
    for (double x : traj.states[k]) os << ',' << x;
    os << '\n';
  }
}

}  // namespace rfm
