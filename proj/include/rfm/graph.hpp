#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "rfm/matrix.hpp"

namespace rfm {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected attributed graph. Edges are stored once as (i, j) with i < j,
/// sorted and without duplicates or self-loops.
struct GraphInstance {
  std::size_t n_nodes = 0;
  std::vector<Edge> edges;
  Matrix node_features;
  std::optional<std::size_t> label;

  std::size_t feature_dim() const noexcept { return node_features.cols(); }
  friend bool operator==(const GraphInstance&, const GraphInstance&) = default;
};

/// Validates and normalizes raw input. Throws EmptyGraph for n = 0,
/// IndexOutOfRange for bad endpoints, ShapeMismatch if features are not n x F.
GraphInstance make_graph(std::size_t n_nodes, std::vector<Edge> edges, Matrix node_features,
                         std::optional<std::size_t> label = std::nullopt);

/// Symmetrized neighbor lists, ascending.
std::vector<std::vector<std::size_t>> neighbors(const GraphInstance& g);

/// Same graph with node i renamed perm[i].
GraphInstance permute_nodes(const GraphInstance& g, const std::vector<std::size_t>& perm);

}  // namespace rfm
