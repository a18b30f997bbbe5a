#pragma once

// Riemannian graph convolution. Every layer runs Log_0 -> linear map ->
// Exp_0 on each node, aggregates the transformed states in the origin tangent
// space with weights 1/(deg(i)+1) over N(i) and i itself, applies the
// activation there and retracts with Exp_0.

#include <cstdint>
#include <vector>

#include "rfm/autodiff/tape.hpp"
#include "rfm/graph.hpp"
#include "rfm/manifold.hpp"

namespace rfm {

enum class Activation { ReLU, Identity };

/// Exp_0(W Log_0(h)), W is d_out x d_in.
ManifoldPoint mobius_matvec(const Matrix& W, const ManifoldPoint& h);

std::vector<ManifoldPoint> rgcn_layer(const Matrix& W, const std::vector<ManifoldPoint>& states,
                                      const GraphInstance& graph, Activation act = Activation::ReLU);

/// Exp_0 of the tangent mean of the node states. Throws EmptyGraph.
ManifoldPoint graph_readout(const std::vector<ManifoldPoint>& states);

struct Embedding {
  ManifoldPoint z;
  Vec v;  // Log_0(z)
};

/// L layers F -> d -> ... -> d. Hidden layers use ReLU, the last is linear.
class GraphEncoder {
 public:
  GraphEncoder() = default;
  GraphEncoder(std::size_t in_features, std::size_t dim, std::size_t layers, Curvature c, std::uint64_t seed);

  std::size_t in_features() const noexcept { return in_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t layers() const noexcept { return weights_.size(); }
  Curvature curvature() const noexcept { return c_; }
  Activation activation(std::size_t layer) const noexcept {
    return layer + 1 < weights_.size() ? Activation::ReLU : Activation::Identity;
  }

  const Matrix& weight(std::size_t l) const { return weights_.at(l).value; }
  ad::Parameter& weight_param(std::size_t l) { return weights_.at(l); }
  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;

  /// Differentiable batch encoding. Returns z (B x d) and v = Log_0(z) (B x d).
  struct Batch {
    ad::Var z;
    ad::Var v;
  };
  Batch encode_batch(ad::Tape& tape, const std::vector<const GraphInstance*>& graphs);

 private:
  std::size_t in_ = 0;
  std::size_t dim_ = 0;
  Curvature c_;
  std::vector<ad::Parameter> weights_;
};

/// Plain (non-recording) single-graph encoding.
Embedding encode(const GraphEncoder& encoder, const GraphInstance& graph);

}  // namespace rfm
