#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "aeval/core.hpp"
#include "aeval/graph.hpp"
#include "aeval/louvain.hpp"

namespace aeval {

// Outcome of checking a subgraph clustering against the full clustering.
// `containment_matches` is evaluated independently of the count condition.
struct AgreementResult {
  bool agrees = false;
  bool count_matches = false;
  bool containment_matches = false;
  std::string reason;  // set when agrees is false
};

// A subgraph clustering agrees with the full clustering when both have the same
// number of clusters and every subcluster fits inside a distinct full cluster.
// The pairing must be injective: two subclusters inside the same full cluster
// do not agree with a clustering of equal size.
inline AgreementResult agreement(const Clustering& c_prime, const Clustering& c) {
  std::map<std::string, size_t> full_cluster_of;
  for (size_t ci = 0; ci < c.clusters.size(); ++ci)
    for (const std::string& id : c.clusters[ci]) full_cluster_of[id] = ci;

  AgreementResult result;
  result.count_matches = c_prime.clusters.size() == c.clusters.size();

  std::vector<std::optional<size_t>> claimed_by(c.clusters.size());
  result.containment_matches = true;
  std::string containment_reason;
  for (size_t si = 0; si < c_prime.clusters.size() && result.containment_matches; ++si) {
    const auto& sub = c_prime.clusters[si];
    std::optional<size_t> target;
    for (const std::string& id : sub) {
      auto it = full_cluster_of.find(id);
      if (it == full_cluster_of.end())
        throw Error("agreement: node '" + id + "' is not in the full clustering");
      if (!target) {
        target = it->second;
      } else if (*target != it->second) {
        result.containment_matches = false;
        containment_reason = "subcluster " + std::to_string(si) + " straddles full clusters (nodes '" +
                             sub.front() + "' and '" + id + "')";
      }
    }
    if (!result.containment_matches) break;
    if (claimed_by[*target]) {
      result.containment_matches = false;
      containment_reason = "subclusters " + std::to_string(*claimed_by[*target]) + " and " +
                           std::to_string(si) + " both map into full cluster " +
                           std::to_string(*target);
      break;
    }
    claimed_by[*target] = si;
  }

  result.agrees = result.count_matches && result.containment_matches;
  if (!result.agrees) {
    if (!result.count_matches)
      result.reason = "cluster count mismatch (" + std::to_string(c_prime.clusters.size()) +
                      " vs " + std::to_string(c.clusters.size()) + ")";
    if (!result.containment_matches) {
      if (!result.reason.empty()) result.reason += "; ";
      result.reason += containment_reason;
    }
  }
  return result;
}

struct KEstimateTraceRow {
  size_t candidate_size = 0;
  size_t repetition = 0;
  bool agrees = false;
  size_t num_clusters = 0;
  std::string reason;
};

struct KEstimate {
  size_t k = 0;
  std::vector<KEstimateTraceRow> trace;
};

struct KEstimateConfig {
  size_t repetitions = 5;
  uint64_t seed = 0;
  int jobs = 1;
};

namespace detail {

inline std::vector<std::string> sample_nodes(const SimilarityGraph& g, size_t count,
                                             uint64_t seed) {
  std::vector<std::string> ids = g.nodes();
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < count; ++i) {
    const size_t j = i + static_cast<size_t>(bounded_draw(rng, ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  return ids;
}

}  // namespace detail

// Walks the candidate sizes from large to small. For each size, `repetitions`
// random induced subgraphs are clustered and checked for agreement with the
// full clustering; the walk stops at the first size where any repetition
// disagrees. The returned k is the smallest size where all repetitions agreed.
inline KEstimate estimate_k(const SimilarityGraph& g, const std::vector<size_t>& sizes,
                            const KEstimateConfig& cfg = {}) {
  if (sizes.empty()) throw Error("estimate_k: empty candidate size list");
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2 || sizes[i] > g.size())
      throw Error("estimate_k: candidate size " + std::to_string(sizes[i]) +
                  " outside [2, " + std::to_string(g.size()) + "]");
    if (i > 0 && sizes[i] >= sizes[i - 1])
      throw Error("estimate_k: candidate sizes must be strictly descending");
  }
  if (cfg.repetitions < 1) throw Error("estimate_k: repetitions must be >= 1");

  const Clustering full = louvain(g, cfg.seed);

  KEstimate estimate;
  std::optional<size_t> best;
  for (const size_t k : sizes) {
    std::vector<KEstimateTraceRow> rows(cfg.repetitions);
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(cfg.repetitions);

    auto worker = [&] {
      for (;;) {
        const size_t rep = next.fetch_add(1);
        if (rep >= cfg.repetitions) return;
        try {
          const uint64_t sub_seed = mix64(cfg.seed, k, rep);
          const auto keep = detail::sample_nodes(g, k, sub_seed);
          const SimilarityGraph sub = induced_subgraph(g, keep);
          const Clustering c_prime = louvain(sub, mix64(sub_seed, 0x5eedULL));
          const AgreementResult a = agreement(c_prime, full);
          rows[rep] = {k, rep, a.agrees, c_prime.clusters.size(), a.reason};
        } catch (...) {
          errors[rep] = std::current_exception();
        }
      }
    };

    const int workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cfg.repetitions)));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    bool all_agree = true;
    for (const auto& row : rows) all_agree = all_agree && row.agrees;
    estimate.trace.insert(estimate.trace.end(), rows.begin(), rows.end());

    if (!all_agree) break;
    best = k;
  }

  if (!best)
    throw Error("estimate_k: no candidate size reached agreement with the full clustering");
  estimate.k = *best;
  return estimate;
}

struct Representatives {
  // cluster index -> representative node id
  std::vector<std::string> reps;
};

// One uniformly random member per cluster, deterministic given the seed.
inline Representatives pick_representatives(const Clustering& c, uint64_t seed) {
  Representatives out;
  std::mt19937_64 rng(mix64(seed, 0xa11ce5ULL));
  for (const auto& cluster : c.clusters) {
    if (cluster.empty()) throw Error("pick_representatives: empty cluster");
    out.reps.push_back(cluster[static_cast<size_t>(bounded_draw(rng, cluster.size()))]);
  }
  return out;
}

}  // namespace aeval
