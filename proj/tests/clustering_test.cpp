#include "aeval/clustering.hpp"

#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"

using namespace aeval;
using namespace aeval::testutil;

namespace {

Clustering make_clustering(std::vector<std::vector<std::string>> clusters) {
  Clustering c;
  for (auto& cl : clusters) {
    std::sort(cl.begin(), cl.end());
    c.clusters.push_back(std::move(cl));
  }
  return c;
}

}  // namespace

TEST(Agreement, IdentityAgrees) {
  const Clustering c = make_clustering({{"a", "b"}, {"c", "d", "e"}});
  const AgreementResult r = agreement(c, c);
  EXPECT_TRUE(r.agrees);
  EXPECT_TRUE(r.count_matches);
  EXPECT_TRUE(r.containment_matches);
}

TEST(Agreement, CountMismatch) {
  const Clustering full = make_clustering({{"a", "b"}, {"c", "d"}, {"e", "f"}});
  const Clustering sub = make_clustering({{"a", "b"}, {"c", "d"}});
  const AgreementResult r = agreement(sub, full);
  EXPECT_FALSE(r.agrees);
  EXPECT_FALSE(r.count_matches);
  EXPECT_TRUE(r.containment_matches);
  EXPECT_NE(r.reason.find("count mismatch"), std::string::npos);
}

TEST(Agreement, StraddlingSubclusterNamesWitness) {
  // 6-node case: subcluster {b, c} spans two full clusters
  const Clustering full = make_clustering({{"a", "b"}, {"c", "d"}, {"e", "f"}});
  const Clustering sub = make_clustering({{"a"}, {"b", "c"}, {"e"}});
  const AgreementResult r = agreement(sub, full);
  EXPECT_FALSE(r.agrees);
  EXPECT_TRUE(r.count_matches);
  EXPECT_FALSE(r.containment_matches);
  EXPECT_NE(r.reason.find("straddles"), std::string::npos);
  EXPECT_NE(r.reason.find("b"), std::string::npos);
  EXPECT_NE(r.reason.find("c"), std::string::npos);
}

TEST(Agreement, PairingMustBeInjective) {
  // both subclusters sit inside the same full cluster; counts match, still no agreement
  const Clustering full = make_clustering({{"a", "b", "c"}, {"d", "e"}});
  const Clustering sub = make_clustering({{"a"}, {"b", "c"}});
  const AgreementResult r = agreement(sub, full);
  EXPECT_FALSE(r.agrees);
  EXPECT_TRUE(r.count_matches);
  EXPECT_FALSE(r.containment_matches);
  EXPECT_NE(r.reason.find("both map"), std::string::npos);
}

TEST(Agreement, NodeSetMismatchIsError) {
  const Clustering full = make_clustering({{"a", "b"}});
  const Clustering sub = make_clustering({{"ghost"}});
  EXPECT_THROW(agreement(sub, full), Error);
}

TEST(Agreement, ContainmentCheckedIndependentlyOfCount) {
  // dropping the count condition can only keep or add agreement, never remove it
  const Clustering full = make_clustering({{"a", "b"}, {"c", "d"}, {"e", "f"}});
  const Clustering contained = make_clustering({{"a"}, {"c", "d"}});
  const AgreementResult r = agreement(contained, full);
  EXPECT_FALSE(r.agrees);  // count differs
  EXPECT_TRUE(r.containment_matches);
}

TEST(PickRepresentatives, SingletonsForced) {
  const Clustering c = make_clustering({{"a"}, {"b"}});
  const Representatives reps = pick_representatives(c, 9);
  EXPECT_EQ(reps.reps, (std::vector<std::string>{"a", "b"}));
}

TEST(PickRepresentatives, DeterministicAndMembers) {
  const Clustering c = make_clustering({{"a", "b", "c", "d"}, {"e", "f", "g"}});
  const Representatives r1 = pick_representatives(c, 123);
  const Representatives r2 = pick_representatives(c, 123);
  EXPECT_EQ(r1.reps, r2.reps);
  ASSERT_EQ(r1.reps.size(), 2u);
  for (size_t i = 0; i < c.clusters.size(); ++i)
    EXPECT_TRUE(std::binary_search(c.clusters[i].begin(), c.clusters[i].end(), r1.reps[i]));
}

TEST(PickRepresentatives, SeedChangesChoice) {
  std::vector<std::string> big;
  for (int i = 0; i < 50; ++i) big.push_back("m" + std::to_string(i));
  const Clustering c = make_clustering({big});
  std::set<std::string> seen;
  for (uint64_t seed = 0; seed < 10; ++seed) seen.insert(pick_representatives(c, seed).reps[0]);
  EXPECT_GT(seen.size(), 1u);
}

TEST(EstimateK, WalksDownPlantedGraph) {
  const auto [g, planted] = planted_partition_graph({40, 40, 40}, 0.8, 1.0, 0.0, 0.2, 4);
  KEstimateConfig cfg;
  cfg.seed = 11;
  cfg.jobs = 4;
  const KEstimate est = estimate_k(g, {100, 80, 60, 40, 20}, cfg);
  EXPECT_LE(est.k, 100u);
  EXPECT_GE(est.k, 20u);
  // trace covers 5 repetitions per tested size, all sizes >= k agree
  std::map<size_t, size_t> reps_per_size;
  std::map<size_t, bool> all_agree;
  for (const auto& row : est.trace) {
    reps_per_size[row.candidate_size]++;
    auto it = all_agree.find(row.candidate_size);
    if (it == all_agree.end())
      all_agree[row.candidate_size] = row.agrees;
    else
      it->second = it->second && row.agrees;
  }
  for (const auto& [size, reps] : reps_per_size) EXPECT_EQ(reps, cfg.repetitions) << size;
  for (const auto& [size, agree] : all_agree)
    if (size >= est.k) EXPECT_TRUE(agree) << "size " << size;
}

TEST(EstimateK, SizeListOfWholeGraph) {
  const auto [g, planted] = planted_partition_graph({10, 10}, 0.9, 1.0, 0.0, 0.1, 6);
  KEstimateConfig cfg;
  cfg.seed = 3;
  const KEstimate est = estimate_k(g, {g.size()}, cfg);
  EXPECT_EQ(est.k, g.size());
  EXPECT_EQ(est.trace.size(), cfg.repetitions);
}

TEST(EstimateK, EmptySizeListRejected) {
  const auto [g, planted] = planted_partition_graph({5, 5}, 0.9, 1.0, 0.0, 0.1, 6);
  EXPECT_THROW(estimate_k(g, {}, {}), Error);
}

TEST(EstimateK, NonDescendingSizesRejected) {
  const auto [g, planted] = planted_partition_graph({5, 5}, 0.9, 1.0, 0.0, 0.1, 6);
  EXPECT_THROW(estimate_k(g, {4, 6}, {}), Error);
  EXPECT_THROW(estimate_k(g, {6, 6}, {}), Error);
}

TEST(EstimateK, OversizedCandidateRejected) {
  const auto [g, planted] = planted_partition_graph({5, 5}, 0.9, 1.0, 0.0, 0.1, 6);
  EXPECT_THROW(estimate_k(g, {11}, {}), Error);
}

TEST(EstimateK, StopsAtFirstDisagreement) {
  // tiny sizes cannot see all three clusters, so the walk must stop above them
  const auto [g, planted] = planted_partition_graph({20, 20, 20}, 0.8, 1.0, 0.0, 0.2, 15);
  KEstimateConfig cfg;
  cfg.seed = 5;
  const KEstimate est = estimate_k(g, {50, 30, 2}, cfg);
  EXPECT_GE(est.k, 30u);
  // the trace never contains a size below the first failing one
  size_t min_size = g.size();
  for (const auto& row : est.trace) min_size = std::min(min_size, row.candidate_size);
  bool failed_at_min = false;
  for (const auto& row : est.trace)
    if (row.candidate_size == min_size && !row.agrees) failed_at_min = true;
  if (min_size > 2) EXPECT_TRUE(failed_at_min);
}
