#include "rfm/encoder.hpp"

#include <algorithm>
#include <memory>

#include "rfm/autodiff/manifold_ops.hpp"
#include "rfm/autodiff/nn.hpp"
#include "rfm/errors.hpp"

namespace rfm {

ManifoldPoint mobius_matvec(const Matrix& W, const ManifoldPoint& h) {
  if (W.cols() != h.dim())
    throw ShapeMismatch("weight has " + std::to_string(W.cols()) + " columns, point has dimension " +
                        std::to_string(h.dim()));
  const Vec t = log_origin(h);
  Vec out(W.rows(), 0.0);
  for (std::size_t r = 0; r < W.rows(); ++r) out[r] = dot(W.row_span(r), t);
  return exp_origin(out, h.curvature());
}

std::vector<ManifoldPoint> rgcn_layer(const Matrix& W, const std::vector<ManifoldPoint>& states,
                                      const GraphInstance& graph, Activation act) {
  if (states.size() != graph.n_nodes) throw ShapeMismatch("state count differs from node count");
  if (states.empty()) throw EmptyGraph("layer over an empty graph");
  const Curvature c = states.front().curvature();
  std::vector<Vec> msg;
  msg.reserve(states.size());
  for (const auto& h : states) {
    if (h.curvature() != c) throw BaseMismatch("node states differ in curvature");
    msg.push_back(log_origin(mobius_matvec(W, h)));
  }
  const auto adj = neighbors(graph);
  std::vector<ManifoldPoint> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double a = 1.0 / static_cast<double>(adj[i].size() + 1);
    Vec agg(W.rows(), 0.0);
    auto add_msg = [&](std::size_t j) {
      for (std::size_t k = 0; k < agg.size(); ++k) agg[k] += a * msg[j][k];
    };
    add_msg(i);
    for (std::size_t j : adj[i]) add_msg(j);
    if (act == Activation::ReLU)
      for (double& x : agg) x = x > 0.0 ? x : 0.0;
    out.push_back(exp_origin(agg, c));
  }
  return out;
}

ManifoldPoint graph_readout(const std::vector<ManifoldPoint>& states) {
  if (states.empty()) throw EmptyGraph("readout over no nodes");
  const Curvature c = states.front().curvature();
  Vec mean(states.front().dim(), 0.0);
  for (const auto& h : states) {
    const Vec t = log_origin(h);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += t[k];
  }
  for (double& x : mean) x /= static_cast<double>(states.size());
  return exp_origin(mean, c);
}

GraphEncoder::GraphEncoder(std::size_t in_features, std::size_t dim, std::size_t layers, Curvature c,
                           std::uint64_t seed)
    : in_(in_features), dim_(dim), c_(c) {
  if (layers == 0) throw InvalidSpec("encoder needs at least one layer");
  std::size_t in = in_features;
  for (std::size_t l = 0; l < layers; ++l) {
    weights_.emplace_back("encoder.w" + std::to_string(l), ad::uniform_init(dim, in, in, seed * 1000003ULL + l));
    in = dim;
  }
}

std::vector<ad::Parameter*> GraphEncoder::parameters() {
  std::vector<ad::Parameter*> out;
  for (auto& w : weights_) out.push_back(&w);
  return out;
}

std::vector<const ad::Parameter*> GraphEncoder::parameters() const {
  std::vector<const ad::Parameter*> out;
  for (const auto& w : weights_) out.push_back(&w);
  return out;
}

GraphEncoder::Batch GraphEncoder::encode_batch(ad::Tape& tape, const std::vector<const GraphInstance*>& graphs) {
  if (graphs.empty()) throw EmptyBatch("no graphs to encode");
  std::size_t total = 0;
  for (const GraphInstance* g : graphs) {
    if (g->n_nodes == 0) throw EmptyGraph("graph has no nodes");
    if (g->feature_dim() != in_)
      throw ShapeMismatch("graph features have width " + std::to_string(g->feature_dim()) + ", encoder expects " +
                          std::to_string(in_));
    total += g->n_nodes;
  }

  Matrix x(total, in_);
  auto agg = std::make_shared<ad::CsrMatrix>();
  auto pool = std::make_shared<ad::CsrMatrix>();
  agg->rows = agg->cols = total;
  pool->rows = graphs.size();
  pool->cols = total;
  std::size_t offset = 0;
  for (const GraphInstance* g : graphs) {
    for (std::size_t i = 0; i < g->n_nodes; ++i)
      for (std::size_t f = 0; f < in_; ++f) x(offset + i, f) = g->node_features(i, f);
    const auto adj = neighbors(*g);
    for (std::size_t i = 0; i < g->n_nodes; ++i) {
      std::vector<std::size_t> cols = adj[i];
      cols.push_back(i);
      std::sort(cols.begin(), cols.end());
      const double a = 1.0 / static_cast<double>(cols.size());
      for (std::size_t j : cols) {
        agg->col_idx.push_back(offset + j);
        agg->values.push_back(a);
      }
      agg->row_ptr.push_back(agg->col_idx.size());
    }
    const double p = 1.0 / static_cast<double>(g->n_nodes);
    for (std::size_t i = 0; i < g->n_nodes; ++i) {
      pool->col_idx.push_back(offset + i);
      pool->values.push_back(p);
    }
    pool->row_ptr.push_back(pool->col_idx.size());
    offset += g->n_nodes;
  }

  const double c = c_.effective();
  ad::Var h = ad::expmap0(tape.constant(std::move(x)), c);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    ad::Var m = ad::mobius_matvec(tape.parameter(weights_[l]), h, c);
    ad::Var t = ad::spmm(agg, ad::logmap0(m, c));
    if (activation(l) == Activation::ReLU) t = ad::relu_act(t);
    h = ad::expmap0(t, c);
  }
  ad::Var z = ad::expmap0(ad::spmm(pool, ad::logmap0(h, c)), c);
  return {z, ad::logmap0(z, c)};
}

Embedding encode(const GraphEncoder& encoder, const GraphInstance& graph) {
  if (graph.feature_dim() != encoder.in_features())
    throw ShapeMismatch("graph features have width " + std::to_string(graph.feature_dim()) + ", encoder expects " +
                        std::to_string(encoder.in_features()));
  std::vector<ManifoldPoint> h;
  h.reserve(graph.n_nodes);
  for (std::size_t i = 0; i < graph.n_nodes; ++i)
    h.push_back(exp_origin(graph.node_features.row_span(i), encoder.curvature()));
  for (std::size_t l = 0; l < encoder.layers(); ++l) h = rgcn_layer(encoder.weight(l), h, graph, encoder.activation(l));
  ManifoldPoint z = graph_readout(h);
  Vec v = log_origin(z);
  return {std::move(z), std::move(v)};
}

}  // namespace rfm
