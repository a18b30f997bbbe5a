#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rfm/autodiff/tape.hpp"
#include "rfm/manifold.hpp"

namespace rfm::ad {

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) fill from a seeded engine.
Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, std::uint64_t seed);

/// Time-conditioned MLP v_theta(z, t): [z, t] -> tanh hidden layers -> R^d.
/// Weights are stored in x out so a layer is x W + b.
class VectorField {
 public:
  VectorField() = default;
  VectorField(std::size_t dim, std::vector<std::size_t> hidden, std::uint64_t seed);
  static VectorField zeros(std::size_t dim, std::vector<std::size_t> hidden);

  /// z is B x d, t is B x 1; returns B x d tangent coefficients at z.
  Var forward(Tape& tape, Var z, Var t);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::size_t>& hidden() const noexcept { return hidden_; }
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> hidden_;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
};

/// v_theta at a single point, evaluated without recording gradients.
TangentVector vector_field_eval(VectorField& field, const ManifoldPoint& z, double t);

/// Linear softmax classifier: logits = v W^T + b, W is K x d.
class Classifier {
 public:
  Classifier() = default;
  Classifier(std::size_t classes, std::size_t dim, std::uint64_t seed);

  /// Binds W and b as fresh leaves on `tape`.
  Var logits(Tape& tape, Var v);

  std::size_t classes() const noexcept { return weight_.value.rows(); }
  std::size_t dim() const noexcept { return weight_.value.cols(); }
  const Matrix& weight_value() const noexcept { return weight_.value; }
  const Matrix& bias_value() const noexcept { return bias_.value; }
  Parameter& weight_param() noexcept { return weight_; }
  Parameter& bias_param() noexcept { return bias_; }
  const Parameter& weight_param() const noexcept { return weight_; }
  const Parameter& bias_param() const noexcept { return bias_; }
  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

 private:
  Parameter weight_;
  Parameter bias_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// L2 penalty folded into the gradient before the moment updates.
  double weight_decay = 0.0;
};

/// Adam with bias-corrected moments over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config);

  void zero_grad();
  /// Applies one update from the gradients currently stored in the parameters.
  void step();

  std::size_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }
  /// Euclidean norm of all parameter gradients taken together.
  double grad_norm() const;

 private:
  std::vector<Parameter*> params_;
  AdamConfig config_;
  std::vector<Matrix> m_, v_;
  std::size_t t_ = 0;
};

// Checkpoint: text header "rfm-checkpoint 1", one "tensor <name> <rows> <cols>"
// line per tensor, a "data" line, then all values as little-endian float64 in
// header order.
void save_checkpoint(const std::filesystem::path& path, const std::vector<const Parameter*>& tensors);
std::vector<Parameter> load_checkpoint(const std::filesystem::path& path);

}  // namespace rfm::ad
