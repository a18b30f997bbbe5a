#include "rfm/flow.hpp"

#include <fstream>
#include <limits>

#include "rfm/autodiff/manifold_ops.hpp"

namespace rfm {

CouplingPlan couple(const std::vector<ManifoldPoint>& source, const std::vector<std::size_t>& source_labels,
                    const std::vector<ManifoldPoint>& target, const std::vector<std::size_t>& target_labels,
                    const std::vector<bool>& target_eligible) {
  if (source.empty() || target.empty()) throw EmptyBatch("coupling needs nonempty source and target batches");
  if (source_labels.size() != source.size() || target_labels.size() != target.size())
    throw BatchSizeMismatch("label count differs from batch size");
  if (!target_eligible.empty() && target_eligible.size() != target.size())
    throw BatchSizeMismatch("eligibility mask differs from target batch size");

  CouplingPlan plan;
  for (std::size_t i = 0; i < source.size(); ++i) {
    std::size_t best_class = target.size(), best_any = target.size();
    double d_class = std::numeric_limits<double>::infinity(), d_any = d_class;
    for (std::size_t j = 0; j < target.size(); ++j) {
      const double d = geodesic_distance(source[i], target[j]);
      if (d < d_any) {
        d_any = d;
        best_any = j;
      }
      const bool eligible = target_eligible.empty() || target_eligible[j];
      if (eligible && target_labels[j] == source_labels[i] && d < d_class) {
        d_class = d;
        best_class = j;
      }
    }
    const bool fb = best_class == target.size();
    plan.pairs.emplace_back(i, fb ? best_any : best_class);
    plan.fallback.push_back(fb);
  }
  return plan;
}

ManifoldPoint geodesic_interpolant(const ManifoldPoint& z_s, const ManifoldPoint& z_T, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainViolation("interpolation time outside [0, 1]");
  if (t == 0.0) return z_s;
  return geodesic_point(z_s, z_T, t);
}

TangentVector target_field(const ManifoldPoint& z_s, const ManifoldPoint& z_T, double t) {
  const ManifoldPoint z_t = geodesic_interpolant(z_s, z_T, t);
  return parallel_transport(z_s, z_t, log_at(z_s, z_T));
}

FlowSample make_flow_sample(const ManifoldPoint& z_s, const ManifoldPoint& z_T, double t) {
  ManifoldPoint z_t = geodesic_interpolant(z_s, z_T, t);
  TangentVector u = parallel_transport(z_s, z_t, log_at(z_s, z_T));
  return {z_s, z_T, t, std::move(z_t), std::move(u)};
}

double fm_loss(ad::VectorField& field, const std::vector<FlowSample>& samples) {
  if (samples.empty()) throw EmptyBatch("flow-matching loss over no samples");
  double total = 0.0;
  for (const FlowSample& s : samples) {
    const TangentVector pred = vector_field_eval(field, s.z_t, s.t);
    double sq = 0.0;
    for (std::size_t k = 0; k < pred.vec.size(); ++k) {
      const double r = pred.vec[k] - s.u_t.vec[k];
      sq += r * r;
    }
    const double lam = conformal_factor(s.z_t);
    total += lam * lam * sq;
  }
  return total / static_cast<double>(samples.size());
}

ad::Var fm_loss(ad::Tape& tape, ad::VectorField& field, ad::Var z_s, ad::Var z_T, ad::Var t, Curvature c) {
  if (z_s.rows() == 0) throw EmptyBatch("flow-matching loss over no samples");
  if (z_s.rows() != z_T.rows() || z_s.rows() != t.rows()) throw BatchSizeMismatch("flow batch operands differ in size");
  const double k = c.effective();
  ad::Var z_t = ad::geodesic(z_s, z_T, t, k);
  ad::Var u = ad::transport(z_s, z_t, ad::logmap(z_s, z_T, k), k);
  ad::Var pred = field.forward(tape, z_t, t);
  ad::Var lam = ad::conformal_factor(z_t, k);
  return ad::mean(ad::mul(ad::row_sum(ad::square(ad::sub(pred, u))), ad::square(lam)));
}

TangentField geodesic_field(const ManifoldPoint& z_T) {
  return [z_T](const ManifoldPoint& z, double t) {
    if (t >= 1.0) return Vec(z.dim(), 0.0);
    Vec v = log_at(z, z_T).vec;
    for (double& x : v) x /= (1.0 - t);
    return v;
  };
}

TangentField learned_field(ad::VectorField& field) {
  return [&field](const ManifoldPoint& z, double t) { return vector_field_eval(field, z, t).vec; };
}

std::vector<ManifoldPoint> transport_integrate(const TangentField& field, const ManifoldPoint& z0, std::size_t steps) {
  if (steps == 0) throw InvalidSpec("transport needs at least one step");
  std::vector<ManifoldPoint> traj{z0};
  traj.reserve(steps + 1);
  const double h = 1.0 / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    try {
      const ManifoldPoint& z = traj.back();
      Vec v = field(z, static_cast<double>(k) * h);
      if (v.size() != z.dim()) throw DimensionMismatch("field output dimension differs from the point");
      for (double& x : v) x *= h;
      traj.push_back(exp_at(z, {z, std::move(v)}));
    } catch (const NumericalError& e) {
      throw TransportAborted("step " + std::to_string(k) + ": " + e.what(), std::move(traj));
    }
  }
  return traj;
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<ManifoldPoint>& trajectory) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string());
  const std::size_t d = trajectory.empty() ? 0 : trajectory.front().dim();
  os << "step,t";
  for (std::size_t k = 0; k < d; ++k) os << ",coord_" << k;
  os << '\n';
  os.precision(12);
  const double n = trajectory.size() > 1 ? static_cast<double>(trajectory.size() - 1) : 1.0;
  for (std::size_t s = 0; s < trajectory.size(); ++s) {
    os << s << ',' << static_cast<double>(s) / n;
    for (double x : trajectory[s].coords()) os << ',' << x;
    os << '\n';
  }
}

}  // namespace rfm
