#include "rfm/harness/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "rfm/errors.hpp"

namespace rfm::harness {

namespace {

std::vector<GraphInstance> sample_domain(const SyntheticSpec& s, std::size_t count, double multiplier, double shift,
                                         std::uint64_t stream) {
  std::seed_seq seq{s.seed, stream};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> nodes(s.min_nodes, s.max_nodes);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double half = 0.5 * static_cast<double>(s.classes - 1);

  std::vector<GraphInstance> out;
  out.reserve(count);
  for (std::size_t g = 0; g < count; ++g) {
    const std::size_t label = g % s.classes;
    const std::size_t n = nodes(rng);
    const double p = s.densities[label] * multiplier;
    std::vector<Edge> edges;
    std::vector<std::size_t> deg(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (u01(rng) < p) {
          edges.emplace_back(i, j);
          ++deg[i];
          ++deg[j];
        }
    Matrix x(n, s.features);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = s.feature_scale * std::log1p(static_cast<double>(deg[i]));
      for (std::size_t f = 1; f < s.features; ++f) {
        double mean = shift * s.feature_sigma;
        if (f == 1) mean += s.class_separation * s.feature_sigma * (static_cast<double>(label) - half);
        x(i, f) = s.feature_scale * (mean + s.feature_sigma * n01(rng));
      }
    }
    out.push_back(make_graph(n, std::move(edges), std::move(x), label));
  }
  return out;
}

}  // namespace

DomainPair generate_synthetic_shift(const SyntheticSpec& spec) {
  validate(spec);
  return {sample_domain(spec, spec.source_graphs, 1.0, 0.0, 0),
          sample_domain(spec, spec.target_graphs, spec.edge_multiplier, spec.feature_shift, 1)};
}

void write_graphs(std::ostream& os, const std::vector<GraphInstance>& graphs, bool hide_labels) {
  char buf[32];
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const GraphInstance& G = graphs[g];
    if (g > 0) os << '\n';
    os << "graph " << G.n_nodes << ' ';
    if (G.label && !hide_labels)
      os << *G.label;
    else
      os << '?';
    os << '\n';
    for (std::size_t i = 0; i < G.n_nodes; ++i) {
      os << "node " << i;
      for (std::size_t f = 0; f < G.feature_dim(); ++f) {
        std::snprintf(buf, sizeof buf, "%.17g", G.node_features(i, f));
        os << ' ' << buf;
      }
      os << '\n';
    }
    for (auto [i, j] : G.edges) os << "edge " << i << ' ' << j << '\n';
  }
}

void write_graph_file(const std::filesystem::path& path, const std::vector<GraphInstance>& graphs, bool hide_labels) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_graphs(os, graphs, hide_labels);
  if (!os) throw Error("failed writing " + path.string());
}

namespace {

struct PendingGraph {
  std::size_t header_line = 0;
  std::size_t n = 0;
  std::optional<std::size_t> label;
  std::vector<std::vector<double>> rows;
  std::vector<bool> seen;
  std::vector<Edge> edges;
};

std::size_t parse_index(const std::string& tok, std::size_t line, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (tok.empty() || tok[0] == '-') throw std::invalid_argument(tok);
    v = std::stoull(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + tok + "'", line);
  }
  if (pos != tok.size()) throw ParseError(std::string("bad ") + what + " '" + tok + "'", line);
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<GraphInstance> parse_graphs(std::istream& is) {
  std::vector<GraphInstance> out;
  std::optional<PendingGraph> cur;
  std::optional<std::size_t> width;
  std::size_t lineno = 0;

  auto finish = [&]() {
    if (!cur) return;
    for (std::size_t i = 0; i < cur->n; ++i)
      if (!cur->seen[i]) throw ParseError("graph is missing node " + std::to_string(i), cur->header_line);
    Matrix x(cur->n, *width);
    for (std::size_t i = 0; i < cur->n; ++i)
      for (std::size_t f = 0; f < *width; ++f) x(i, f) = cur->rows[i][f];
    out.push_back(make_graph(cur->n, std::move(cur->edges), std::move(x), cur->label));
    cur.reset();
  };

  std::string line;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) {
      finish();
      continue;
    }
    if (kw[0] == '#') continue;
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);

    if (kw == "graph") {
      if (cur) throw ParseError("graph header inside an unfinished block (missing blank line)", lineno);
      if (tok.size() != 2) throw ParseError("expected 'graph <n_nodes> <label|?>'", lineno);
      PendingGraph pg;
      pg.header_line = lineno;
      pg.n = parse_index(tok[0], lineno, "node count");
      if (pg.n == 0) throw ParseError("graph with 0 nodes", lineno);
      if (tok[1] != "?") pg.label = parse_index(tok[1], lineno, "label");
      pg.rows.resize(pg.n);
      pg.seen.assign(pg.n, false);
      cur = std::move(pg);
    } else if (kw == "node") {
      if (!cur) throw ParseError("node line outside a graph block", lineno);
      if (tok.empty()) throw ParseError("expected 'node <idx> <features...>'", lineno);
      const std::size_t i = parse_index(tok[0], lineno, "node index");
      if (i >= cur->n) throw ParseError("node index " + std::to_string(i) + " >= " + std::to_string(cur->n), lineno);
      if (cur->seen[i]) throw ParseError("duplicate node " + std::to_string(i), lineno);
      const std::size_t F = tok.size() - 1;
      if (F == 0) throw ParseError("node without features", lineno);
      if (width && *width != F)
        throw ParseError("feature width " + std::to_string(F) + " differs from " + std::to_string(*width), lineno);
      width = F;
      for (std::size_t f = 1; f < tok.size(); ++f) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
          v = std::stod(tok[f], &pos);
        } catch (const std::exception&) {
          throw ParseError("bad feature value '" + tok[f] + "'", lineno);
        }
        if (pos != tok[f].size() || !std::isfinite(v)) throw ParseError("bad feature value '" + tok[f] + "'", lineno);
        cur->rows[i].push_back(v);
      }
      cur->seen[i] = true;
    } else if (kw == "edge") {
      if (!cur) throw ParseError("edge line outside a graph block", lineno);
      if (tok.size() != 2) throw ParseError("expected 'edge <i> <j>'", lineno);
      const std::size_t i = parse_index(tok[0], lineno, "edge endpoint");
      const std::size_t j = parse_index(tok[1], lineno, "edge endpoint");
      if (i >= cur->n || j >= cur->n)
        throw IndexOutOfRange("line " + std::to_string(lineno) + ": edge (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") outside " + std::to_string(cur->n) + " nodes");
      cur->edges.emplace_back(i, j);
    } else {
      throw ParseError("unknown record '" + kw + "'", lineno);
    }
  }
  finish();
  return out;
}

std::vector<GraphInstance> load_graph_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  return parse_graphs(is);
}

double mean_degree(const std::vector<GraphInstance>& graphs) {
  std::size_t nodes = 0, edges = 0;
  for (const auto& g : graphs) {
    nodes += g.n_nodes;
    edges += g.edges.size();
  }
  return nodes ? 2.0 * static_cast<double>(edges) / static_cast<double>(nodes) : 0.0;
}

}  // namespace rfm::harness
