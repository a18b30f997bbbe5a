#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rfm/graph.hpp"
#include "rfm/harness/config.hpp"

namespace rfm::harness {

struct DomainPair {
  std::vector<GraphInstance> source;
  std::vector<GraphInstance> target;  // labels kept for evaluation only
};

/// Block-model graphs: the edge probability depends on the class, node
/// features are log(1 + degree) followed by Gaussians whose first mean depends
/// on the class. The target domain multiplies edge probabilities and shifts
/// every Gaussian mean. Source and target use independent streams of `seed`.
DomainPair generate_synthetic_shift(const SyntheticSpec& spec);

/// Block format: `graph <n> <label|?>`, `node <i> <f...>` lines, `edge <i> <j>`
/// lines, blank line between graphs.
void write_graphs(std::ostream& os, const std::vector<GraphInstance>& graphs, bool hide_labels = false);
void write_graph_file(const std::filesystem::path& path, const std::vector<GraphInstance>& graphs,
                      bool hide_labels = false);

/// Throws ParseError (with line number) or IndexOutOfRange.
std::vector<GraphInstance> parse_graphs(std::istream& is);
std::vector<GraphInstance> load_graph_file(const std::filesystem::path& path);

double mean_degree(const std::vector<GraphInstance>& graphs);

}  // namespace rfm::harness
