#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "aeval/core.hpp"

namespace aeval {

// Complete undirected weighted graph over submissions (or synthetic copies).
// Weights live in a dense upper-triangular array; no self-loops.
class SimilarityGraph {
public:
  SimilarityGraph() = default;

  explicit SimilarityGraph(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw Error("similarity graph needs at least 1 node");
    for (size_t i = 0; i < nodes_.size(); ++i) {
      if (!index_.emplace(nodes_[i], i).second)
        throw Error("similarity graph: duplicate node '" + nodes_[i] + "'");
    }
    weights_.assign(edge_count(), 0.0);
  }

  size_t size() const { return nodes_.size(); }
  size_t edge_count() const { return nodes_.size() * (nodes_.size() - 1) / 2; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& node(size_t i) const { return nodes_[i]; }

  size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown graph node '" + id + "'");
    return it->second;
  }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  double weight(size_t i, size_t j) const { return weights_[offset(i, j)]; }

  void set_weight(size_t i, size_t j, double w) {
    check_unit_interval(w, "edge (" + nodes_[i] + "," + nodes_[j] + ")");
    weights_[offset(i, j)] = w;
  }

  double weight_between(const std::string& a, const std::string& b) const {
    return weight(index_of(a), index_of(b));
  }

  bool operator==(const SimilarityGraph& other) const {
    return nodes_ == other.nodes_ && weights_ == other.weights_;
  }

private:
  size_t offset(size_t i, size_t j) const {
    if (i == j || i >= nodes_.size() || j >= nodes_.size())
      throw Error("bad edge index (" + std::to_string(i) + "," + std::to_string(j) + ")");
    if (i > j) std::swap(i, j);
    // row i of the upper triangle starts after i*(2n-i-1)/2 cells
    return i * (2 * nodes_.size() - i - 1) / 2 + (j - i - 1);
  }

  std::vector<std::string> nodes_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<double> weights_;
};

struct SampleConfig {
  size_t cap = 720;
  uint64_t seed = 0;

  void validate() const {
    if (cap < 1) throw Error("sample cap must be >= 1");
  }
};

// Keeps the whole gold set when it fits under the cap; otherwise draws a uniform
// random subset of size cap with the seeded generator. Output is sorted.
inline std::vector<std::string> sample_gold(const std::vector<std::string>& gold,
                                            const SampleConfig& cfg) {
  cfg.validate();
  std::vector<std::string> ids = gold;
  std::sort(ids.begin(), ids.end());
  if (ids.size() <= cfg.cap) return ids;

  std::mt19937_64 rng(cfg.seed);
  for (size_t i = 0; i < cfg.cap; ++i) {
    const size_t j = i + static_cast<size_t>(bounded_draw(rng, ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(cfg.cap);
  std::sort(ids.begin(), ids.end());
  return ids;
}

using PairwiseEstimatorFn = std::function<double(const std::string&, const std::string&)>;

// Builds the complete graph by evaluating the estimator on every unordered pair.
// Pairs are sharded over `jobs` workers; each worker writes disjoint cells, so
// parallel and serial runs produce identical matrices.
inline SimilarityGraph build_graph(const std::vector<std::string>& ids,
                                   const PairwiseEstimatorFn& estimator, int jobs = 1) {
  if (ids.size() < 2) throw Error("build_graph: need at least 2 nodes");
  SimilarityGraph g{ids};
  const size_t n = ids.size();

  std::vector<std::pair<size_t, size_t>> pairs;
  pairs.reserve(g.edge_count());
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::mutex error_mutex;
  std::string first_error;
  std::atomic<size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const size_t p = next.fetch_add(1);
      if (p >= pairs.size()) return;
      const auto [i, j] = pairs[p];
      try {
        g.set_weight(i, j, estimator(g.node(i), g.node(j)));
      } catch (const std::exception& e) {
        std::scoped_lock lock(error_mutex);
        if (first_error.empty())
          first_error = "estimator failed on pair (" + g.node(i) + "," + g.node(j) + "): " + e.what();
      }
    }
  };

  const int workers = std::max(1, jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!first_error.empty()) throw Error(first_error);
  return g;
}

// Original node behind each synthetic copy.
struct JoinMapping {
  std::unordered_map<std::string, std::string> copy_of;
  std::unordered_map<std::string, size_t> copy_index;
};

// Inflates a graph to factor times its size by repeated graph join with itself.
// Copies are labelled `id#c`. Edges between copies of the same original weigh 1;
// every other edge keeps the original pair's weight.
inline std::pair<SimilarityGraph, JoinMapping> graph_join_inflate(const SimilarityGraph& g,
                                                                  size_t factor) {
  if (factor < 1) throw Error("inflate factor must be >= 1");
  const size_t n = g.size();
  std::vector<std::string> nodes;
  nodes.reserve(n * factor);
  JoinMapping mapping;
  for (size_t c = 0; c < factor; ++c) {
    for (size_t v = 0; v < n; ++v) {
      std::string label = g.node(v) + "#" + std::to_string(c);
      mapping.copy_of[label] = g.node(v);
      mapping.copy_index[label] = c;
      nodes.push_back(std::move(label));
    }
  }
  SimilarityGraph out{std::move(nodes)};
  const size_t total = n * factor;
  for (size_t a = 0; a < total; ++a) {
    const size_t va = a % n;
    for (size_t b = a + 1; b < total; ++b) {
      const size_t vb = b % n;
      out.set_weight(a, b, va == vb ? 1.0 : g.weight(va, vb));
    }
  }
  return {std::move(out), std::move(mapping)};
}

// Complete subgraph over `keep`, weights copied; node order follows the parent.
inline SimilarityGraph induced_subgraph(const SimilarityGraph& g,
                                        const std::vector<std::string>& keep) {
  if (keep.size() < 2) throw Error("induced subgraph needs at least 2 nodes");
  std::vector<size_t> picked;
  picked.reserve(keep.size());
  {
    std::vector<char> mark(g.size(), 0);
    for (const std::string& id : keep) {
      const size_t idx = g.index_of(id);
      if (mark[idx]) throw Error("induced subgraph: duplicate node '" + id + "'");
      mark[idx] = 1;
    }
    for (size_t i = 0; i < g.size(); ++i)
      if (mark[i]) picked.push_back(i);
  }
  std::vector<std::string> nodes;
  nodes.reserve(picked.size());
  for (size_t i : picked) nodes.push_back(g.node(i));
  SimilarityGraph out{std::move(nodes)};
  for (size_t a = 0; a < picked.size(); ++a)
    for (size_t b = a + 1; b < picked.size(); ++b)
      out.set_weight(a, b, g.weight(picked[a], picked[b]));
  return out;
}

// Edge list CSV: one `id,id,weight` line per pair, weights with 6 decimals,
// row-major over the upper triangle. Round-trips through import_edge_list.
inline void export_edge_list(const SimilarityGraph& g, std::ostream& out) {
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = i + 1; j < g.size(); ++j)
      out << g.node(i) << ',' << g.node(j) << ',' << format_fixed(g.weight(i, j), 6) << '\n';
}

inline void export_edge_list(const SimilarityGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write edge list: " + path.string());
  export_edge_list(g, out);
  if (!out) throw Error("write failed: " + path.string());
}

inline SimilarityGraph import_edge_list(const std::filesystem::path& path) {
  const auto lines = nonblank_lines(read_text_file(path));
  std::vector<std::string> nodes;
  std::unordered_map<std::string, size_t> index;
  auto intern = [&](const std::string& id) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    if (!is_valid_id(id)) throw Error(path.string() + ": bad node id '" + id + "'");
    index.emplace(id, nodes.size());
    nodes.push_back(id);
    return nodes.size() - 1;
  };

  struct Edge {
    size_t a, b;
    double w;
  };
  std::vector<Edge> edges;
  edges.reserve(lines.size());
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const auto fields = split_csv_line(lines[ln]);
    if (fields.size() != 3)
      throw Error(path.string() + ":" + std::to_string(ln + 1) + ": expected 'id,id,weight'");
    const size_t a = intern(fields[0]);
    const size_t b = intern(fields[1]);
    if (a == b)
      throw Error(path.string() + ":" + std::to_string(ln + 1) + ": self-loop on '" + fields[0] + "'");
    const double w = parse_double_strict(fields[2], path.string() + ":" + std::to_string(ln + 1));
    check_unit_interval(w, path.string() + ":" + std::to_string(ln + 1));
    edges.push_back({a, b, w});
  }

  if (nodes.size() < 2) throw Error(path.string() + ": fewer than 2 nodes");
  SimilarityGraph g{nodes};
  std::vector<char> seen(g.edge_count(), 0);
  size_t filled = 0;
  for (const Edge& e : edges) {
    const size_t i = std::min(e.a, e.b), j = std::max(e.a, e.b);
    const size_t cell = i * (2 * nodes.size() - i - 1) / 2 + (j - i - 1);
    if (seen[cell])
      throw Error(path.string() + ": duplicate edge (" + nodes[e.a] + "," + nodes[e.b] + ")");
    seen[cell] = 1;
    ++filled;
    g.set_weight(e.a, e.b, e.w);
  }
  if (filled != g.edge_count())
    throw Error(path.string() + ": incomplete graph, " + std::to_string(filled) + " of " +
                std::to_string(g.edge_count()) + " edges present");
  return g;
}

inline void export_dot(const SimilarityGraph& g, std::ostream& out) {
  out << "graph similarity {\n";
  for (size_t i = 0; i < g.size(); ++i) out << "  \"" << g.node(i) << "\";\n";
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = i + 1; j < g.size(); ++j)
      out << "  \"" << g.node(i) << "\" -- \"" << g.node(j) << "\" [weight="
          << format_fixed(g.weight(i, j), 6) << "];\n";
  out << "}\n";
}

inline void export_dot(const SimilarityGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dot file: " + path.string());
  export_dot(g, out);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace aeval
