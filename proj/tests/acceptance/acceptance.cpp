// Acceptance suite. Runs every criterion (or those named on the command line)
// and prints one PASS/FAIL line each. Exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grad_cases.hpp"
#include "oracles.hpp"
#include "rfm/dynamics.hpp"
#include "rfm/flow.hpp"
#include "rfm/geometry_suite.hpp"
#include "rfm/harness/data.hpp"
#include "rfm/harness/trainer.hpp"
#include "rfm/losses.hpp"
#include "rfm/polar.hpp"
#include "rfm/stability.hpp"

using namespace rfm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// 1 ------------------------------------------------------------------------------------------

Outcome geometry_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checks = 0;
  for (double c : {-2.0, -1.0, -0.25, 1e-8, 0.5, 1.0}) {
    const auto results = run_geometry_suite(Curvature(c), 0, 1000, 2024);
    bool has_euclid = false;
    for (const auto& r : results) {
      ++checks;
      has_euclid = has_euclid || r.name == "euclidean_limit";
      if (!r.passed() || r.cases < 1000) {
        o.pass = false;
        o.detail += fmt(" c=%g %s max_err=%.2e tol=%.0e;", c, r.name.c_str(), r.max_error, r.tolerance);
      }
    }
    if (std::abs(c) < 1e-6 && !has_euclid) {
      o.pass = false;
      o.detail += " euclidean limit not exercised;";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 10.0) o.pass = false;
  o.detail = fmt("%zu invariant tallies over 6 curvatures, %.2f s", checks, secs) + o.detail;
  return o;
}

// 2 ------------------------------------------------------------------------------------------

Outcome volume_growth_check() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Vec radii{6.0, 8.0};
  const auto h = volume_growth(Curvature(-1.0), 3, radii);
  const double drift = std::abs(h[1].normalized / h[0].normalized - 1.0);

  const double v1 = ball_volume(1.0, Curvature(0.0), 3), v100 = ball_volume(100.0, Curvature(0.0), 3);
  const double slope = (std::log(v100) - std::log(v1)) / std::log(100.0);

  bool bounded = true;
  for (double c : {0.5, 1.0, 2.0})
    for (std::size_t d : {2, 3, 4}) {
      const double total = total_sphere_volume(Curvature(c), d);
      const double rmax = std::numbers::pi / std::sqrt(c);
      for (int i = 1; i <= 20; ++i)
        bounded = bounded && ball_volume(rmax * i / 20.0, Curvature(c), d) <= total * (1.0 + 1e-9);
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.pass = drift < 0.02 && std::abs(slope - 3.0) <= 0.01 && bounded && secs < 5.0;
  o.detail = fmt("normalized volume drift R=6->8 %.4f%%, euclidean slope %.6f, sphere bound %s, %.2f s", 100.0 * drift,
                 slope, bounded ? "holds" : "VIOLATED", secs);
  return o;
}

// 3 ------------------------------------------------------------------------------------------

Outcome polar_orthogonality() {
  Outcome o;
  std::string parts;
  for (const auto& r : run_polar_suite(Curvature(-1.0), 0, 500, 77)) {
    const bool ok = r.passed() && r.cases >= 500;
    o.pass = o.pass && ok;
    parts += fmt(" %s: %zu cases max_err=%.2e%s;", r.name.c_str(), r.cases, r.max_error, ok ? "" : " FAIL");
  }
  o.detail = "c=-1" + parts;
  return o;
}

// 4 ------------------------------------------------------------------------------------------

Outcome imaginary_spectrum() {
  Outcome o;
  double worst_re = 0.0, worst_im = 0.0;
  std::mt19937_64 sizes(4);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const std::size_t n = dim(sizes), m = dim(sizes);
    GameState g;
    g.interaction = random_interaction(n, m, s);
    g.theta.assign(n, 0.0);
    g.phi.assign(m, 0.0);
    const auto spec = eigen_spectrum(minimax_jacobian(g, 0.0));
    worst_re = std::max(worst_re, spec.max_abs_real_part);

    Vec im;
    for (const auto& z : spec.eigenvalues) im.push_back(std::abs(z.imag()));
    Vec want;
    for (double sv : oracle::jacobi_singular_values(g.interaction)) want.insert(want.end(), {sv, sv});
    want.resize(n + m, 0.0);
    std::sort(im.begin(), im.end());
    std::sort(want.begin(), want.end());
    for (std::size_t i = 0; i < im.size(); ++i) worst_im = std::max(worst_im, std::abs(im[i] - want[i]));
  }
  o.pass = worst_re < 1e-8 && worst_im < 1e-6;
  o.detail = fmt("100 games up to 8x8: max|Re| %.2e, max | |Im| - sigma(K) | %.2e", worst_re, worst_im);
  return o;
}

// 5 ------------------------------------------------------------------------------------------

Outcome lyapunov_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const double dt = 0.05;
  const std::size_t steps = 400;
  FmProblem problem = make_fm_problem(16, {16, 16}, 1);
  const ParamField field = fm_gradient_field(problem);
  const auto fm = simulate_flow(field, fm_objective(problem),
                                flatten_parameters(std::as_const(problem.field).parameters()), dt, steps);
  const auto fm_mon = lyapunov_monitor(fm, secant_lipschitz(fm, field));

  GameState game;
  game.interaction = random_interaction(4, 4, 1);
  game.theta.assign(4, 0.0);
  game.phi.assign(4, 0.0);
  game.theta[0] = 1.0;
  Vec x0 = game.theta;
  x0.insert(x0.end(), game.phi.begin(), game.phi.end());
  const auto adv = simulate_flow(adversarial_field(game, 0.0), game_loss(game, 0.0), x0, dt, steps);
  double fro = 0.0;
  for (double v : game.interaction.data()) fro += v * v;
  const auto adv_mon = lyapunov_monitor(adv, std::sqrt(fro));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Outcome o;
  o.pass = fm_mon.monotone && fm_mon.residual_ok && !adv_mon.monotone && secs < 30.0;
  o.detail = fmt("FM loss %.4e -> %.4e monotone=%s residual %.2e <= %.2e; bilinear flagged=%s (%zu violations); %.2f s",
                 fm.losses.front(), fm.losses.back(), fm_mon.monotone ? "yes" : "no", fm_mon.max_abs_residual,
                 fm_mon.residual_bound, adv_mon.monotone ? "no" : "yes", adv_mon.violations.size(), secs);
  return o;
}

// 6 ------------------------------------------------------------------------------------------

Outcome ot_oracle() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> k(0, 255);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t b = 1 + static_cast<std::size_t>(i) % 6;
    Vec x(b), y(b);
    // Multiples of 1/64 below 4 keep every partial sum exact.
    for (double& v : x) v = k(rng) / 64.0;
    for (double& v : y) v = k(rng) / 64.0;
    if (radial_wasserstein(x, y) != oracle::brute_force_w1(x, y)) ++mismatches;
  }
  Outcome o;
  o.pass = mismatches == 0;
  o.detail = fmt("200 instances, B = 1..6, %zu inexact", mismatches);
  return o;
}

// 7 ------------------------------------------------------------------------------------------

double end_to_end_gradient_error(std::uint64_t seed) {
  harness::RunConfig cfg;
  cfg.dim = 4;
  cfg.layers = 2;
  cfg.field_hidden = {8};
  cfg.seed = seed;
  harness::SyntheticSpec spec;
  spec.source_graphs = spec.target_graphs = 6;
  spec.min_nodes = 4;
  spec.max_nodes = 7;
  spec.seed = seed;
  const auto data = harness::generate_synthetic_shift(spec);
  harness::Model model(spec.features, spec.classes, cfg);
  const double c = model.encoder.curvature().effective();

  std::vector<const GraphInstance*> src, tgt;
  std::vector<std::size_t> labels;
  for (const auto& g : data.source) {
    src.push_back(&g);
    labels.push_back(*g.label);
  }
  for (const auto& g : data.target) tgt.push_back(&g);

  const Matrix target_tangents = harness::embed_tangents(model.encoder, data.target);
  const auto gate = angular_gate(model.classifier, target_tangents, 0.5);
  std::vector<ManifoldPoint> zs, zt;
  for (const auto& g : data.source) zs.push_back(encode(model.encoder, g).z);
  for (const auto& g : data.target) zt.push_back(encode(model.encoder, g).z);
  const auto plan = couple(zs, labels, zt, gate.pseudo_label);
  std::vector<std::size_t> si, ti;
  for (auto [a, b] : plan.pairs) {
    si.push_back(a);
    ti.push_back(b);
  }
  std::mt19937_64 rng(seed);
  const Matrix times = oracle::random_matrix(rng, si.size(), 1, 0.05, 0.95);

  auto build = [&](ad::Tape& tape) {
    const auto es = model.encoder.encode_batch(tape, src);
    const auto et = model.encoder.encode_batch(tape, tgt);
    ad::Var task = task_loss(tape, model.classifier, es.v, labels);
    ad::Var rad = radial_wasserstein(ad::l2_norm(es.v), ad::l2_norm(et.v));
    ad::Var ang = angular_loss(tape, model.classifier, et.v, gate, 2.0);
    ad::Var fm = fm_loss(tape, model.field, ad::gather_rows(es.z, si), ad::gather_rows(et.z, ti),
                         tape.constant(times), Curvature(c));
    return ad::add(task, ad::scale(ad::add(ad::add(rad, ang), fm), 0.1));
  };
  return oracle::parameter_gradient_check(
      [&] {
        ad::Tape t;
        return build(t).item();
      },
      [&] {
        ad::Tape t;
        t.backward(build(t));
      },
      model.parameters());
}

Outcome autodiff_suite() {
  Outcome o;
  double worst = 0.0;
  std::string worst_name;
  std::size_t n = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    for (const auto& gc : oracle::gradient_cases(seed)) {
      const double e = oracle::gradient_check(gc.fn, gc.inputs, seed);
      ++n;
      if (!(e <= worst)) {
        worst = e;
        worst_name = gc.name;
      }
    }
  }
  double e2e = 0.0;
  for (std::uint64_t seed : {11, 12, 13}) e2e = std::max(e2e, end_to_end_gradient_error(seed));
  o.pass = worst < 1e-4 && e2e < 1e-4;
  o.detail = fmt("%zu primitive checks, worst %.2e (%s); encode->total loss worst %.2e", n, worst, worst_name.c_str(), e2e);
  return o;
}

// 8 ------------------------------------------------------------------------------------------

Outcome flow_transport() {
  const Curvature c(-1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ut(0.0, 1.0);
  constexpr std::size_t P = 64;
  const ManifoldPoint center({-0.3, 0.0}, c), shift({0.45, 0.1}, c);
  std::vector<ManifoldPoint> zs, zt;
  while (zs.size() < P) {
    const double a = 0.25 * u(rng), b = 0.25 * u(rng);
    if (a * a + b * b > 0.0625) continue;
    zs.push_back(mobius_add(center, ManifoldPoint({a, b}, c)));
    zt.push_back(mobius_add(shift, zs.back()));
  }
  // One class per pair makes the class-conditional coupling pair each source with its own image.
  std::vector<std::size_t> cls(P);
  for (std::size_t i = 0; i < P; ++i) cls[i] = i;
  const auto plan = couple(zs, cls, zt, cls);

  Matrix ms(P, 2), mt(P, 2);
  for (std::size_t i = 0; i < P; ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      ms(i, k) = zs[plan.pairs[i].first].coords()[k];
      mt(i, k) = zt[plan.pairs[i].second].coords()[k];
    }
  ad::VectorField field(2, {32, 32}, 5);
  ad::Adam opt(field.parameters(), {3e-3, 0.9, 0.999, 1e-8, 0.0});
  for (int it = 0; it < 3000; ++it) {
    Matrix t(P, 1);
    for (double& x : t.data()) x = ut(rng);
    ad::Tape tape;
    ad::Var loss = fm_loss(tape, field, tape.constant(ms), tape.constant(mt), tape.constant(t), c);
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
  }
  std::vector<FlowSample> eval;
  for (auto [i, j] : plan.pairs)
    for (int k = 0; k <= 10; ++k) eval.push_back(make_flow_sample(zs[i], zt[j], k / 10.0));
  const double loss = fm_loss(field, eval);

  const TangentField v = learned_field(field);
  std::size_t within = 0;
  double rmin = INFINITY, rmax = 0.0;
  for (auto [i, j] : plan.pairs) {
    const auto e100 = transport_integrate(v, zs[i], 100).back();
    const auto e200 = transport_integrate(v, zs[i], 200).back();
    const auto exact = transport_integrate(v, zs[i], 6400).back();
    if (geodesic_distance(e100, zt[j]) < 0.1) ++within;
    const double r = geodesic_distance(e100, exact) / geodesic_distance(e200, exact);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  Outcome o;
  o.pass = loss < 1e-3 && within * 10 >= P * 9 && rmin >= 1.7 && rmax <= 2.3;
  o.detail = fmt("fm_loss %.2e, %zu/%zu endpoints within 0.1, N=100/N=200 error ratio in [%.3f, %.3f]", loss, within, P,
                 rmin, rmax);
  return o;
}

// 9 ------------------------------------------------------------------------------------------

Outcome adaptation_benchmark() {
  const auto t0 = std::chrono::steady_clock::now();
  const char* names[] = {"full", "source-only", "w/o FM", "w/o RA", "w/o AA"};
  std::vector<double> acc[5];
  std::vector<double> attached;
  for (std::uint64_t s = 0; s < 5; ++s) {
    harness::RunConfig base;
    base.seed = s;
    base.synthetic.seed = 7 + s;
    base.fm_detach_embeddings = true;
    const auto data = harness::generate_synthetic_shift(base.synthetic);
    for (int v = 0; v < 5; ++v) {
      harness::RunConfig cfg = base;
      if (v == 1) cfg.lambda_rad = cfg.lambda_ang = cfg.lambda_fm = 0.0;
      if (v == 2) cfg.lambda_fm = 0.0;
      if (v == 3) cfg.lambda_rad = 0.0;
      if (v == 4) cfg.lambda_ang = 0.0;
      acc[v].push_back(harness::train(cfg, data.source, data.target).metrics.back().target_acc);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (std::uint64_t s = 0; s < 5; ++s) {
    harness::RunConfig cfg;
    cfg.seed = s;
    cfg.synthetic.seed = 7 + s;
    const auto data = harness::generate_synthetic_shift(cfg.synthetic);
    attached.push_back(harness::train(cfg, data.source, data.target).metrics.back().target_acc);
  }

  double med[5];
  for (int v = 0; v < 5; ++v) med[v] = median(acc[v]);
  Outcome o;
  o.pass = med[0] - med[1] >= 0.03 && med[2] <= med[0] && med[3] <= med[0] && med[4] <= med[0] && secs < 600.0;
  for (int v = 0; v < 5; ++v) o.detail += fmt("%s %.4f, ", names[v], med[v]);
  o.detail += fmt("gain %+.1f pts, %.0f s (informational: full with FM gradients into the encoder %.4f)",
                  100.0 * (med[0] - med[1]), secs, median(attached));
  return o;
}

// 10 -----------------------------------------------------------------------------------------

Outcome stability_ordering() {
  Outcome o;
  std::string parts;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto run = compare_stability(s, 0.05, 400);
    const bool ok = run.fm_stats.variance < run.adv_stats.variance;
    o.pass = o.pass && ok;
    parts += fmt(" seed %llu %.2e<%.2e%s;", static_cast<unsigned long long>(s), run.fm_stats.variance,
                 run.adv_stats.variance, ok ? "" : " FAIL");
  }
  o.detail = "grad-norm variance FM vs adversarial:" + parts;
  return o;
}

// 11 -----------------------------------------------------------------------------------------

Outcome determinism() {
  harness::RunConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 42;
  const auto [src, tgt] = harness::load_domains(cfg);
  const fs::path root = fs::temp_directory_path() / "rfm_acceptance_determinism";
  fs::remove_all(root);
  std::string bytes[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path dir = root / std::to_string(r);
    fs::create_directories(dir);
    harness::train(cfg, src, tgt, dir);
    std::ifstream is(dir / "metrics.csv", std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    bytes[r] = ss.str();
  }
  fs::remove_all(root);
  Outcome o;
  o.pass = !bytes[0].empty() && bytes[0] == bytes[1];
  o.detail = fmt("two runs, %zu bytes of metrics.csv each, %s", bytes[0].size(), o.pass ? "identical" : "DIFFERENT");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "geometry suite", geometry_suite},
      {2, "volume growth", volume_growth_check},
      {3, "polar orthogonality", polar_orthogonality},
      {4, "imaginary minimax spectrum", imaginary_spectrum},
      {5, "lyapunov monotonicity", lyapunov_check},
      {6, "1-D OT oracle", ot_oracle},
      {7, "autodiff gradients", autodiff_suite},
      {8, "flow transport", flow_transport},
      {9, "adaptation benchmark", adaptation_benchmark},
      {10, "stability ordering", stability_ordering},
      {11, "determinism", determinism},
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!chosen.empty() && !chosen.count(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failed;
    std::printf("%s [%d] %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
