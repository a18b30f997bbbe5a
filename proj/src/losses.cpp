#include "rfm/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfm/errors.hpp"
#include "rfm/manifold.hpp"

namespace rfm {

namespace {

std::vector<std::size_t> sorted_order(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  return idx;
}

void check_batches(std::size_t a, std::size_t b) {
  if (a != b) throw BatchSizeMismatch(std::to_string(a) + " source radii vs " + std::to_string(b) + " target radii");
  if (a == 0) throw EmptyBatch("radial alignment needs at least one sample");
}

void check_labels(const std::vector<std::size_t>& labels, std::size_t rows, std::size_t classes) {
  if (labels.size() != rows) throw BatchSizeMismatch("label count differs from batch size");
  for (std::size_t y : labels)
    if (y >= classes) throw LabelOutOfRange("label " + std::to_string(y) + " with " + std::to_string(classes) + " classes");
}

double logsumexp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double n = norm2(m.row_span(r));
    if (n < kZeroNorm) continue;
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) /= n;
  }
  return out;
}

/// Divides each row by its norm; zero rows stay zero.
ad::Var normalize_rows(ad::Var x) {
  ad::Var n = ad::l2_norm(x);
  Matrix guard(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r)
    if (n.value()(r, 0) < kZeroNorm) guard(r, 0) = 1.0;
  return ad::div(x, ad::add(n, x.tape()->constant(std::move(guard))));
}

}  // namespace

std::size_t AngularGateReport::gated() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }

double task_loss(const ad::Classifier& clf, const Matrix& tangents, const std::vector<std::size_t>& labels) {
  if (tangents.cols() != clf.dim()) throw ShapeMismatch("tangent width differs from classifier input");
  check_labels(labels, tangents.rows(), clf.classes());
  if (tangents.rows() == 0) throw EmptyBatch("task loss over an empty batch");
  double total = 0.0;
  Vec logits(clf.classes());
  for (std::size_t i = 0; i < tangents.rows(); ++i) {
    for (std::size_t k = 0; k < clf.classes(); ++k)
      logits[k] = dot(clf.weight_value().row_span(k), tangents.row_span(i)) + clf.bias_value()(0, k);
    total += logsumexp(logits) - logits[labels[i]];
  }
  return total / static_cast<double>(tangents.rows());
}

double radial_wasserstein(std::span<const double> source_radii, std::span<const double> target_radii) {
  check_batches(source_radii.size(), target_radii.size());
  const auto is = sorted_order(source_radii);
  const auto it = sorted_order(target_radii);
  double s = 0.0;
  for (std::size_t k = 0; k < is.size(); ++k) s += std::abs(source_radii[is[k]] - target_radii[it[k]]);
  return s / static_cast<double>(is.size());
}

AngularGateReport angular_gate(const ad::Classifier& clf, const Matrix& target_tangents, double zeta) {
  if (target_tangents.cols() != clf.dim()) throw ShapeMismatch("tangent width differs from classifier input");
  AngularGateReport rep;
  const std::size_t K = clf.classes();
  Vec logits(K);
  for (std::size_t i = 0; i < target_tangents.rows(); ++i) {
    const auto v = target_tangents.row_span(i);
    for (std::size_t k = 0; k < K; ++k) logits[k] = dot(clf.weight_value().row_span(k), v);
    const std::size_t arg = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    const double conf = std::exp(logits[arg] - logsumexp(logits));
    const bool m = conf > zeta;
    const double alpha = std::exp(-norm2(v));
    rep.confidence.push_back(conf);
    rep.mask.push_back(m);
    rep.weight.push_back(alpha);
    rep.pseudo_label.push_back(arg);
    if (m) rep.effective_count += alpha;
  }
  return rep;
}

Matrix cosine_similarity(const Matrix& tangents, const Matrix& prototypes) {
  if (tangents.cols() != prototypes.cols()) throw ShapeMismatch("tangent and prototype widths differ");
  return matmul(normalized_rows(tangents), normalized_rows(prototypes).transposed());
}

double angular_loss(const ad::Classifier& clf, const Matrix& target_tangents, const AngularGateReport& report,
                    double temperature, double eps) {
  if (report.mask.size() != target_tangents.rows()) throw BatchSizeMismatch("gate report size differs from batch");
  const Matrix s = cosine_similarity(target_tangents, clf.weight_value());
  double num = 0.0, den = 0.0;
  Vec z(s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (!report.mask[i]) continue;
    for (std::size_t k = 0; k < s.cols(); ++k) z[k] = temperature * s(i, k);
    const double ce = logsumexp(z) - z[report.pseudo_label[i]];
    num += report.weight[i] * ce;
    den += report.weight[i];
  }
  return num / (den + eps);
}

LossBreakdown total_loss(double task, double rad, double ang, double fm, Lambdas lambdas) {
  if (lambdas.rad < 0.0 || lambdas.ang < 0.0 || lambdas.fm < 0.0) throw InvalidSpec("loss weights must be nonnegative");
  LossBreakdown b{task, rad, ang, fm, 0.0, lambdas};
  b.total = task + lambdas.rad * rad + lambdas.ang * ang + lambdas.fm * fm;
  return b;
}

ad::Var task_loss(ad::Tape& tape, ad::Classifier& clf, ad::Var tangents, const std::vector<std::size_t>& labels) {
  if (tangents.cols() != clf.dim()) throw ShapeMismatch("tangent width differs from classifier input");
  check_labels(labels, tangents.rows(), clf.classes());
  return ad::cross_entropy(clf.logits(tape, tangents), labels);
}

ad::Var radial_wasserstein(ad::Var source_radii, ad::Var target_radii) {
  if (source_radii.cols() != 1 || target_radii.cols() != 1) throw ShapeMismatch("radii must be B x 1 columns");
  check_batches(source_radii.rows(), target_radii.rows());
  const auto is = sorted_order(source_radii.value().data());
  const auto it = sorted_order(target_radii.value().data());
  return ad::mean(ad::abs(ad::sub(ad::gather_rows(source_radii, is), ad::gather_rows(target_radii, it))));
}

ad::Var angular_loss(ad::Tape& tape, ad::Classifier& clf, ad::Var target_tangents, const AngularGateReport& report,
                     double temperature, double eps) {
  if (report.mask.size() != target_tangents.rows()) throw BatchSizeMismatch("gate report size differs from batch");
  std::vector<std::size_t> rows, labels;
  std::vector<double> weights;
  for (std::size_t i = 0; i < report.mask.size(); ++i) {
    if (!report.mask[i]) continue;
    rows.push_back(i);
    labels.push_back(report.pseudo_label[i]);
    weights.push_back(report.weight[i]);
  }
  if (rows.empty()) return tape.constant(Matrix(1, 1, 0.0));
  const double den = std::accumulate(weights.begin(), weights.end(), 0.0) + eps;
  ad::Var v = normalize_rows(ad::gather_rows(target_tangents, rows));
  ad::Var proto = normalize_rows(tape.parameter(clf.weight_param()));
  ad::Var s = ad::scale(ad::matmul(v, ad::transpose(proto)), temperature);
  ad::Var ce = ad::cross_entropy_rows(s, labels);
  ad::Var a = tape.constant(Matrix(weights.size(), 1, weights));
  return ad::scale(ad::sum(ad::mul(ce, a)), 1.0 / den);
}

}  // namespace rfm
