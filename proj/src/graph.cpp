#include "rfm/graph.hpp"

#include <algorithm>

#include "rfm/errors.hpp"

namespace rfm {

GraphInstance make_graph(std::size_t n_nodes, std::vector<Edge> edges, Matrix node_features,
                         std::optional<std::size_t> label) {
  if (n_nodes == 0) throw EmptyGraph("graph has no nodes");
  if (node_features.rows() != n_nodes)
    throw ShapeMismatch("feature rows (" + std::to_string(node_features.rows()) + ") differ from node count (" +
                        std::to_string(n_nodes) + ")");
  std::vector<Edge> norm;
  norm.reserve(edges.size());
  for (auto [i, j] : edges) {
    if (i >= n_nodes || j >= n_nodes)
      throw IndexOutOfRange("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") outside " +
                            std::to_string(n_nodes) + " nodes");
    if (i == j) continue;
    norm.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(norm.begin(), norm.end());
  norm.erase(std::unique(norm.begin(), norm.end()), norm.end());
  return {n_nodes, std::move(norm), std::move(node_features), label};
}

std::vector<std::vector<std::size_t>> neighbors(const GraphInstance& g) {
  std::vector<std::vector<std::size_t>> adj(g.n_nodes);
  for (auto [i, j] : g.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

GraphInstance permute_nodes(const GraphInstance& g, const std::vector<std::size_t>& perm) {
  if (perm.size() != g.n_nodes) throw ShapeMismatch("permutation length differs from node count");
  Matrix x(g.n_nodes, g.feature_dim());
  for (std::size_t i = 0; i < g.n_nodes; ++i)
    for (std::size_t f = 0; f < g.feature_dim(); ++f) x(perm[i], f) = g.node_features(i, f);
  std::vector<Edge> e;
  for (auto [i, j] : g.edges) e.emplace_back(perm[i], perm[j]);
  return make_graph(g.n_nodes, std::move(e), std::move(x), g.label);
}

}  // namespace rfm
