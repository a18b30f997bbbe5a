#include "rfm/stability.hpp"

#include <algorithm>
#include <random>
#include <utility>

namespace rfm {

FmProblem make_fm_problem(std::size_t pairs, std::vector<std::size_t> hidden, std::uint64_t seed) {
  const Curvature c(-1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5), ut(0.0, 1.0);
  FmProblem p{ad::VectorField(2, std::move(hidden), seed + 1), {}};
  for (std::size_t i = 0; i < pairs; ++i) {
    const ManifoldPoint zs = project({u(rng), u(rng)}, c);
    const ManifoldPoint zt = project({u(rng), u(rng)}, c);
    p.samples.push_back(make_flow_sample(zs, zt, ut(rng)));
  }
  return p;
}

Vec flatten_parameters(const std::vector<const ad::Parameter*>& params) {
  Vec out;
  for (const ad::Parameter* p : params) out.insert(out.end(), p->value.data().begin(), p->value.data().end());
  return out;
}

void assign_parameters(const std::vector<ad::Parameter*>& params, const Vec& flat) {
  std::size_t off = 0;
  for (ad::Parameter* p : params) {
    auto& d = p->value.data();
    if (off + d.size() > flat.size()) throw DimensionMismatch("flat parameter vector is too short");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off), flat.begin() + static_cast<std::ptrdiff_t>(off + d.size()),
              d.begin());
    off += d.size();
  }
  if (off != flat.size()) throw DimensionMismatch("flat parameter vector is too long");
}

ParamField fm_gradient_field(FmProblem& problem) {
  return [&problem](const Vec& x) {
    auto params = problem.field.parameters();
    assign_parameters(params, x);
    for (ad::Parameter* p : params) p->zero_grad();
    const std::size_t B = problem.samples.size();
    Matrix zs(B, 2), zT(B, 2), t(B, 1);
    for (std::size_t i = 0; i < B; ++i) {
      const FlowSample& s = problem.samples[i];
      for (std::size_t k = 0; k < 2; ++k) {
        zs(i, k) = s.z_s.coords()[k];
        zT(i, k) = s.z_t_end.coords()[k];
      }
      t(i, 0) = s.t;
    }
    ad::Tape tape;
    ad::Var loss = fm_loss(tape, problem.field, tape.constant(zs), tape.constant(zT), tape.constant(t), Curvature(-1.0));
    tape.backward(loss);
    Vec g;
    for (ad::Parameter* p : params)
      for (double v : p->grad.data()) g.push_back(-v);
    return g;
  };
}

ScalarFn fm_objective(FmProblem& problem) {
  return [&problem](const Vec& x) {
    assign_parameters(problem.field.parameters(), x);
    return fm_loss(problem.field, problem.samples);
  };
}

namespace {

std::vector<double> scaled_by_max(std::vector<double> v) {
  const double m = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  if (m > 0.0)
    for (double& x : v) x /= m;
  return v;
}

}  // namespace

StabilityRun compare_stability(std::uint64_t seed, double dt, std::size_t steps) {
  StabilityRun run;

  FmProblem problem = make_fm_problem(16, {16, 16}, seed);
  const Vec x0 = flatten_parameters(std::as_const(problem.field).parameters());
  run.fm = simulate_flow(fm_gradient_field(problem), fm_objective(problem), x0, dt, steps);

  GameState game;
  game.interaction = random_interaction(4, 4, seed + 7);
  std::mt19937_64 rng(seed + 11);
  std::normal_distribution<double> n01;
  Vec w0(8);
  for (double& v : w0) v = n01(rng);
  game.theta.assign(w0.begin(), w0.begin() + 4);
  game.phi.assign(w0.begin() + 4, w0.end());
  run.adversarial = simulate_flow(adversarial_field(game, 0.0), game_loss(game, 0.0), w0, dt, steps);

  std::vector<double> adv;
  for (const Vec& s : run.adversarial.states) adv.push_back(generator_grad_norm(game, 0.0, s));
  run.fm_norms = scaled_by_max(run.fm.field_norms);
  run.adv_norms = scaled_by_max(std::move(adv));
  run.fm_stats = grad_norm_stats(run.fm_norms);
  run.adv_stats = grad_norm_stats(run.adv_norms);
  return run;
}

}  // namespace rfm
