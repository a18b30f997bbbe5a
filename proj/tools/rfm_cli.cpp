#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "rfm/dynamics.hpp"
#include "rfm/errors.hpp"
#include "rfm/geometry_suite.hpp"
#include "rfm/harness/config.hpp"
#include "rfm/harness/data.hpp"
#include "rfm/harness/trainer.hpp"
#include "rfm/polar.hpp"
#include "rfm/stability.hpp"

namespace fs = std::filesystem;
using namespace rfm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int cmd_train(const fs::path& config, const fs::path& out) {
  const harness::RunConfig cfg = harness::load_config(config);
  auto [source, target] = harness::load_domains(cfg);
  const auto res = harness::train(cfg, source, target, out);
  const auto& last = res.metrics.back();
  std::printf("trained %zu epochs: source_acc=%.4f target_acc=%.4f total=%.6f\n", last.epoch, last.source_acc,
              last.target_acc, last.loss.total);
  std::printf("wrote %s and %s\n", (out / "metrics.csv").c_str(), (out / "checkpoint.bin").c_str());
  return kExitOk;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& data) {
  harness::Model model = harness::load_model(checkpoint);
  const auto graphs = harness::load_graph_file(data);
  std::printf("accuracy=%.6f graphs=%zu\n", harness::evaluate(model, graphs), graphs.size());
  return kExitOk;
}

int cmd_geom_check(double c, std::size_t d, const fs::path& out, std::size_t cases, std::uint64_t seed) {
  const Curvature curv(c);
  bool ok = true;
  auto report = [&](const std::vector<InvariantResult>& rs) {
    for (const auto& r : rs) {
      std::printf("%-32s %s cases=%zu failures=%zu max_err=%.3e tol=%.1e\n", r.name.c_str(), r.passed() ? "ok  " : "FAIL",
                  r.cases, r.failures, r.max_error, r.tolerance);
      ok = ok && r.passed();
    }
  };
  report(run_geometry_suite(curv, d, cases, seed));
  if (d >= 2) report(run_polar_suite(curv, d, cases, seed + 1));

  std::vector<double> radii;
  const double rmax = curv.geometry() == Geometry::Spherical ? 3.14159265358979 / std::sqrt(c) : 8.0;
  for (int i = 1; i <= 40; ++i) radii.push_back(rmax * i / 40.0);
  const auto rows = volume_growth(curv, d, radii);
  std::FILE* f = std::fopen(out.c_str(), "w");
  if (!f) throw Error("cannot open " + out.string());
  std::fprintf(f, "radius,volume,normalized\n");
  for (const auto& r : rows) std::fprintf(f, "%.10g,%.10g,%.10g\n", r.radius, r.volume, r.normalized);
  std::fclose(f);
  std::printf("wrote %s\n", out.c_str());
  return ok ? kExitOk : kExitNumerical;
}

int cmd_dynamics(const std::string& mode, const fs::path& out, double dt, std::size_t steps, std::uint64_t seed) {
  if (mode == "adversarial") {
    GameState game;
    game.interaction = random_interaction(4, 4, seed);
    game.theta.assign(4, 0.0);
    game.phi.assign(4, 0.0);
    game.theta[0] = 1.0;
    Vec x0(game.theta);
    x0.insert(x0.end(), game.phi.begin(), game.phi.end());
    const auto traj = simulate_flow(adversarial_field(game, 0.0), game_loss(game, 0.0), x0, dt, steps);
    write_flow_csv(out, traj);
    const auto spec = eigen_spectrum(minimax_jacobian(game, 0.0));
    const fs::path spath = out.parent_path() / "spectrum.csv";
    write_spectrum_csv(spath, spec);
    double lip = 0.0;
    for (double v : game.interaction.data()) lip += v * v;
    const auto mon = lyapunov_monitor(traj, std::sqrt(lip));
    std::printf("adversarial: max|Re|=%.3e monotone=%s violations=%zu\n", spec.max_abs_real_part,
                mon.monotone ? "yes" : "no", mon.violations.size());
    std::printf("wrote %s and %s\n", out.c_str(), spath.c_str());
  } else {
    FmProblem problem = make_fm_problem(16, {16, 16}, seed);
    const ParamField field = fm_gradient_field(problem);
    const auto traj = simulate_flow(field, fm_objective(problem),
                                    flatten_parameters(std::as_const(problem.field).parameters()), dt, steps);
    write_flow_csv(out, traj);
    const auto mon = lyapunov_monitor(traj, secant_lipschitz(traj, field));
    const auto stats = grad_norm_stats(traj.field_norms);
    std::printf("flow: loss %.6f -> %.6f monotone=%s residual_ok=%s grad_norm mean=%.4e var=%.4e\n",
                traj.losses.front(), traj.losses.back(), mon.monotone ? "yes" : "no", mon.residual_ok ? "yes" : "no",
                stats.mean, stats.variance);
    std::printf("wrote %s\n", out.c_str());
  }
  return kExitOk;
}

int cmd_gen(const fs::path& spec_path, const fs::path& out) {
  const harness::SyntheticSpec spec = harness::load_synthetic_spec(spec_path);
  const auto d = harness::generate_synthetic_shift(spec);
  const fs::path src = out.string() + "_source.txt";
  const fs::path tgt = out.string() + "_target.txt";
  harness::write_graph_file(src, d.source);
  harness::write_graph_file(tgt, d.target);
  std::printf("wrote %s (%zu graphs, mean degree %.3f) and %s (%zu graphs, mean degree %.3f)\n", src.c_str(),
              d.source.size(), harness::mean_degree(d.source), tgt.c_str(), d.target.size(),
              harness::mean_degree(d.target));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian flow matching for graph domain adaptation"};
  app.require_subcommand(1);

  fs::path config, out_dir;
  auto* train = app.add_subcommand("train", "Train on the configured source/target domains");
  train->add_option("--config", config, "key = value config file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "Output directory for metrics.csv and checkpoint.bin")->required();

  fs::path checkpoint, data;
  auto* eval = app.add_subcommand("eval", "Accuracy of a checkpoint on a labeled graph file");
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data)->required()->check(CLI::ExistingFile);

  double c = -1.0;
  std::size_t d = 3, cases = 1000;
  std::uint64_t seed = 1;
  fs::path geom_out;
  auto* geom = app.add_subcommand("geom-check", "Run geometry invariants and write a volume-growth CSV");
  geom->add_option("--c", c, "Curvature")->required();
  geom->add_option("--d", d, "Dimension")->required()->check(CLI::PositiveNumber);
  geom->add_option("--out", geom_out, "Volume-growth CSV")->required();
  geom->add_option("--cases", cases, "Seeded cases per invariant");
  geom->add_option("--seed", seed);

  std::string mode;
  fs::path dyn_out;
  double dt = 0.05;
  std::size_t steps = 400;
  auto* dyn = app.add_subcommand("dynamics", "Simulate adversarial or flow-matching gradient dynamics");
  dyn->add_option("--mode", mode)->required()->check(CLI::IsMember({"adversarial", "flow"}));
  dyn->add_option("--out", dyn_out, "Trajectory CSV")->required();
  dyn->add_option("--dt", dt)->check(CLI::PositiveNumber);
  dyn->add_option("--steps", steps);
  dyn->add_option("--seed", seed);

  fs::path spec_path, gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic source/target pair");
  gen->add_option("--spec", spec_path)->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output prefix; writes <out>_source.txt and <out>_target.txt")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return cmd_train(config, out_dir);
    if (*eval) return cmd_eval(checkpoint, data);
    if (*geom) return cmd_geom_check(c, d, geom_out, cases, seed);
    if (*dyn) return cmd_dynamics(mode, dyn_out, dt, steps, seed);
    if (*gen) return cmd_gen(spec_path, gen_out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
