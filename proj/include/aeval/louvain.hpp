#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "aeval/core.hpp"
#include "aeval/graph.hpp"

namespace aeval {

// A partition of graph nodes into disjoint, exhaustive approach clusters.
// Clusters are sorted by size descending, then by smallest member id; members
// are sorted within each cluster.
struct Clustering {
  std::vector<std::vector<std::string>> clusters;
  double modularity = 0.0;

  size_t cluster_of(const std::string& id) const {
    for (size_t i = 0; i < clusters.size(); ++i)
      if (std::binary_search(clusters[i].begin(), clusters[i].end(), id)) return i;
    throw Error("node '" + id + "' not in any cluster");
  }
};

// Weighted modularity of a membership assignment, computed from scratch.
// Defined as 0 when the graph has no edge weight.
inline double modularity(const SimilarityGraph& g, const std::vector<size_t>& membership) {
  const size_t n = g.size();
  if (membership.size() != n) throw Error("modularity: membership size mismatch");
  std::vector<double> degree(n, 0.0);
  double two_m = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      const double w = g.weight(i, j);
      degree[i] += w;
      degree[j] += w;
      two_m += 2.0 * w;
    }
  if (two_m == 0.0) return 0.0;
  double q = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (membership[i] != membership[j]) continue;
      const double w = (i == j) ? 0.0 : g.weight(std::min(i, j), std::max(i, j));
      q += w - degree[i] * degree[j] / two_m;
    }
  return q / two_m;
}

inline double modularity(const SimilarityGraph& g, const Clustering& c) {
  std::vector<size_t> membership(g.size());
  for (size_t ci = 0; ci < c.clusters.size(); ++ci)
    for (const std::string& id : c.clusters[ci]) membership[g.index_of(id)] = ci;
  return modularity(g, membership);
}

namespace detail {

// Dense working graph for one Louvain level. adj[i][i] holds twice the internal
// weight of the aggregated community so degrees and modularity carry across
// levels unchanged.
struct LouvainLevel {
  std::vector<std::vector<double>> adj;
  std::vector<double> degree;
  double two_m = 0.0;

  size_t size() const { return adj.size(); }

  void init_degrees() {
    const size_t n = adj.size();
    degree.assign(n, 0.0);
    two_m = 0.0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) degree[i] += adj[i][j];
      two_m += degree[i];
    }
  }
};

// Local moving: sweeps nodes in a seeded order, repeating until a full pass
// yields no strictly improving move. Only strictly positive gains move, so Q
// rises with every move and the loop terminates.
inline bool local_moves(const LouvainLevel& level, std::vector<size_t>& community,
                        std::mt19937_64& rng) {
  const size_t n = level.size();
  if (level.two_m == 0.0) return false;
  const double m = level.two_m / 2.0;

  std::vector<double> tot(n, 0.0);  // sum of degrees per community
  for (size_t i = 0; i < n; ++i) tot[community[i]] += level.degree[i];

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  shuffle_seeded(order, rng);

  std::vector<double> weight_to(n, 0.0);
  bool any_move_ever = false;
  bool moved_in_pass = true;
  while (moved_in_pass) {
    moved_in_pass = false;
    for (const size_t node : order) {
      const size_t old_comm = community[node];

      // weight from node to every community (self excluded)
      std::fill(weight_to.begin(), weight_to.end(), 0.0);
      for (size_t j = 0; j < n; ++j)
        if (j != node) weight_to[community[j]] += level.adj[node][j];

      tot[old_comm] -= level.degree[node];

      // gain of joining community c from the detached state:
      //   k_{node,c}/m - tot_c * d_node / (2 m^2)
      auto gain_of = [&](size_t c) {
        return weight_to[c] / m - tot[c] * level.degree[node] / (2.0 * m * m);
      };

      // Empty communities act as "become a singleton" (gain 0). The ascending
      // scan keeps the first community reaching the maximal gain, which is
      // exactly the lowest-community-id tie-break.
      constexpr double kEps = 1e-12;
      size_t best_comm = old_comm;
      double best_gain = gain_of(old_comm);
      for (size_t c = 0; c < n; ++c) {
        if (c == old_comm) continue;
        const double gain = gain_of(c);
        if (gain > best_gain + kEps) {
          best_gain = gain;
          best_comm = c;
        }
      }

      tot[best_comm] += level.degree[node];
      community[node] = best_comm;
      if (best_comm != old_comm) {
        moved_in_pass = true;
        any_move_ever = true;
      }
    }
  }
  return any_move_ever;
}

// Aggregates communities into a smaller level. `community` must be compacted to
// 0..k-1 beforehand; the diagonal accumulates internal weight twice.
inline LouvainLevel aggregate(const LouvainLevel& level, const std::vector<size_t>& community,
                              size_t num_comms) {
  LouvainLevel next;
  next.adj.assign(num_comms, std::vector<double>(num_comms, 0.0));
  const size_t n = level.size();
  for (size_t i = 0; i < n; ++i) {
    next.adj[community[i]][community[i]] += level.adj[i][i];
    for (size_t j = i + 1; j < n; ++j) {
      const double w = level.adj[i][j];
      if (w == 0.0) continue;
      const size_t ci = community[i], cj = community[j];
      if (ci == cj) {
        next.adj[ci][ci] += 2.0 * w;
      } else {
        next.adj[ci][cj] += w;
        next.adj[cj][ci] += w;
      }
    }
  }
  next.init_degrees();
  return next;
}

inline size_t compact_labels(std::vector<size_t>& community) {
  std::vector<size_t> remap(*std::max_element(community.begin(), community.end()) + 1, SIZE_MAX);
  size_t next_label = 0;
  for (size_t& c : community) {
    if (remap[c] == SIZE_MAX) remap[c] = next_label++;
    c = remap[c];
  }
  return next_label;
}

// The two-phase loop (local moves, then aggregation) starting from an initial
// membership over the base nodes. Every aggregation strictly shrinks the level,
// so the loop terminates.
inline std::vector<size_t> louvain_levels(const LouvainLevel& base, std::vector<size_t> membership,
                                          std::mt19937_64& rng) {
  compact_labels(membership);
  LouvainLevel level = base;
  std::vector<size_t> community = membership;  // level 1 nodes are the base nodes
  std::vector<size_t> node_to_final;
  bool first_level = true;
  for (;;) {
    local_moves(level, community, rng);
    const size_t num_comms = compact_labels(community);
    if (first_level) {
      node_to_final = community;
      first_level = false;
    } else {
      for (size_t& c : node_to_final) c = community[c];
    }
    if (num_comms == level.size()) break;
    level = aggregate(level, community, num_comms);
    community.assign(num_comms, 0);
    std::iota(community.begin(), community.end(), size_t{0});
  }
  return node_to_final;
}

// Exhaustive 2-way re-partition refinement. Greedy node moves cannot split an
// over-merged community, exchange nodes between communities, or restructure a
// few small communities at once, so unions of up to three converged communities
// are re-partitioned exactly when the union has at most this many nodes; larger
// ones are kept as the move phase shaped them. The union's contribution to Q is
// compared absolutely:
//   local(parts) = sum_P [ in_P / (2m) - (tot_P / (2m))^2 ]
constexpr size_t kRepartitionSearchMax = 14;

struct RepartitionCandidate {
  double gain = 0.0;
  std::vector<size_t> s_side;  // base-node indices; the rest of `nodes` forms T
  std::vector<size_t> nodes;   // the union that was re-partitioned
};

// Best 2-way partition of `nodes` versus the current arrangement's local score.
inline void best_repartition_of(const LouvainLevel& base, const std::vector<size_t>& nodes,
                                double current_local, RepartitionCandidate& out) {
  const double m = base.two_m / 2.0;
  const size_t s = nodes.size();

  double in_u = 0.0, tot_u = 0.0;
  for (size_t i = 0; i < s; ++i) {
    tot_u += base.degree[nodes[i]];
    for (size_t j = i + 1; j < s; ++j) in_u += 2.0 * base.adj[nodes[i]][nodes[j]];
  }

  const uint64_t mask_limit = uint64_t{1} << (s - 1);
  for (uint64_t mask = 0; mask < mask_limit; ++mask) {
    // nodes[0] is pinned to the S side; bit b places nodes[b+1] in S
    double tot_s = base.degree[nodes[0]];
    double cut = 0.0;
    for (size_t b = 1; b < s; ++b)
      if ((mask >> (b - 1)) & 1) tot_s += base.degree[nodes[b]];
    for (size_t i = 0; i < s; ++i) {
      const bool i_in_s = i == 0 || ((mask >> (i - 1)) & 1);
      for (size_t j = i + 1; j < s; ++j) {
        const bool j_in_s = (mask >> (j - 1)) & 1;
        if (i_in_s != j_in_s) cut += base.adj[nodes[i]][nodes[j]];
      }
    }
    const double tot_t = tot_u - tot_s;
    const double local = (in_u - 2.0 * cut) / (2.0 * m) -
                         (tot_s * tot_s + tot_t * tot_t) / (4.0 * m * m);
    const double gain = local - current_local;
    if (gain > out.gain + 1e-12) {
      out.gain = gain;
      out.nodes = nodes;
      out.s_side.clear();
      out.s_side.push_back(nodes[0]);
      for (size_t b = 1; b < s; ++b)
        if ((mask >> (b - 1)) & 1) out.s_side.push_back(nodes[b]);
    }
  }
}

inline bool best_repartition(const LouvainLevel& base, const std::vector<size_t>& membership,
                             RepartitionCandidate& out) {
  if (base.two_m == 0.0) return false;
  const double m = base.two_m / 2.0;
  const size_t num_comms = *std::max_element(membership.begin(), membership.end()) + 1;

  std::vector<std::vector<size_t>> members(num_comms);
  for (size_t v = 0; v < membership.size(); ++v) members[membership[v]].push_back(v);

  auto local_of = [&](const std::vector<size_t>& part) {
    double in = 0.0, tot = 0.0;
    for (size_t i = 0; i < part.size(); ++i) {
      tot += base.degree[part[i]];
      for (size_t j = i + 1; j < part.size(); ++j) in += 2.0 * base.adj[part[i]][part[j]];
    }
    return in / (2.0 * m) - (tot * tot) / (4.0 * m * m);
  };

  out.gain = 0.0;
  out.s_side.clear();
  out.nodes.clear();

  std::vector<size_t> union_nodes;
  auto consider = [&](std::initializer_list<size_t> comm_ids) {
    size_t total = 0;
    for (size_t c : comm_ids) total += members[c].size();
    if (total > kRepartitionSearchMax) return;
    union_nodes.clear();
    double current_local = 0.0;
    for (size_t c : comm_ids) {
      union_nodes.insert(union_nodes.end(), members[c].begin(), members[c].end());
      current_local += local_of(members[c]);
    }
    best_repartition_of(base, union_nodes, current_local, out);
  };

  for (size_t a = 0; a < num_comms; ++a) {
    if (members[a].size() >= 2) consider({a});
    for (size_t b = a + 1; b < num_comms; ++b) {
      consider({a, b});
      for (size_t c = b + 1; c < num_comms; ++c) consider({a, b, c});
    }
  }
  return !out.nodes.empty();
}

}  // namespace detail

// Weighted Louvain at resolution 1: seeded-shuffle local moves with best-gain,
// lowest-community-id tie-break, plus aggregation, iterated to a fixed point.
// Because greedy node moves cannot split an over-merged community, converged
// small communities are additionally checked against every exact 2-way split;
// an improving split is applied and the move/aggregate loop re-runs. The result
// is deterministic given (graph, seed).
inline Clustering louvain(const SimilarityGraph& g, uint64_t seed) {
  const size_t n = g.size();
  if (n == 0) throw Error("louvain: empty graph");

  detail::LouvainLevel base;
  base.adj.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      const double w = g.weight(i, j);
      base.adj[i][j] = w;
      base.adj[j][i] = w;
    }
  base.init_degrees();

  std::mt19937_64 rng(mix64(seed));
  std::vector<size_t> membership(n);
  std::iota(membership.begin(), membership.end(), size_t{0});
  membership = detail::louvain_levels(base, std::move(membership), rng);

  // Re-partition refinement: Q strictly increases per round, so this terminates.
  detail::RepartitionCandidate candidate;
  while (detail::best_repartition(base, membership, candidate)) {
    const size_t fresh_s = membership.size();
    const size_t fresh_t = membership.size() + 1;
    for (size_t v : candidate.nodes) membership[v] = fresh_t;
    for (size_t v : candidate.s_side) membership[v] = fresh_s;
    membership = detail::louvain_levels(base, std::move(membership), rng);
  }

  std::vector<std::vector<std::string>> buckets(n);
  for (size_t i = 0; i < n; ++i) buckets[membership[i]].push_back(g.node(i));

  Clustering result;
  for (auto& bucket : buckets) {
    if (bucket.empty()) continue;
    std::sort(bucket.begin(), bucket.end());
    result.clusters.push_back(std::move(bucket));
  }
  std::sort(result.clusters.begin(), result.clusters.end(),
            [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  result.modularity = modularity(g, result);
  return result;
}

}  // namespace aeval
