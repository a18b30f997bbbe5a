#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rfm/autodiff/nn.hpp"
#include "rfm/autodiff/tape.hpp"
#include "rfm/matrix.hpp"

namespace rfm {

inline constexpr double kAngularEps = 1e-8;
inline constexpr double kDefaultTemperature = 10.0;
inline constexpr double kDefaultZeta = 0.7;

struct Lambdas {
  double rad = 0.1;
  double ang = 0.1;
  double fm = 0.1;
};

struct LossBreakdown {
  double task = 0.0;
  double rad = 0.0;
  double ang = 0.0;
  double fm = 0.0;
  double total = 0.0;
  Lambdas lambdas;
};

struct AngularGateReport {
  std::vector<double> confidence;
  std::vector<bool> mask;
  std::vector<double> weight;
  std::vector<std::size_t> pseudo_label;
  double effective_count = 0.0;

  std::size_t gated() const;
};

/// Mean cross-entropy of Softmax(W v + b) against labels; one tangent per row.
double task_loss(const ad::Classifier& clf, const Matrix& tangents, const std::vector<std::size_t>& labels);

/// (1/B) sum_k |R_S[k] - R_T[k]| over the sorted radii.
double radial_wasserstein(std::span<const double> source_radii, std::span<const double> target_radii);

/// Confidence gating with p = Softmax(W v) (no bias) and alpha_i = exp(-|v_i|).
AngularGateReport angular_gate(const ad::Classifier& clf, const Matrix& target_tangents, double zeta);

/// Cosine similarity of each tangent row with each classifier prototype, B x K.
Matrix cosine_similarity(const Matrix& tangents, const Matrix& prototypes);

double angular_loss(const ad::Classifier& clf, const Matrix& target_tangents, const AngularGateReport& report,
                    double temperature = kDefaultTemperature, double eps = kAngularEps);

LossBreakdown total_loss(double task, double rad, double ang, double fm, Lambdas lambdas);

// Differentiable forms. Tangents are B x d nodes on the classifier's tape.
ad::Var task_loss(ad::Tape& tape, ad::Classifier& clf, ad::Var tangents, const std::vector<std::size_t>& labels);
/// Radii are B x 1 nodes.
ad::Var radial_wasserstein(ad::Var source_radii, ad::Var target_radii);
ad::Var angular_loss(ad::Tape& tape, ad::Classifier& clf, ad::Var target_tangents, const AngularGateReport& report,
                     double temperature = kDefaultTemperature, double eps = kAngularEps);

}  // namespace rfm
