#include "aeval/graph.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace aeval;
using namespace aeval::testutil;

namespace {

std::vector<std::string> make_ids(size_t n) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(1000 + i));
  return ids;
}

// Deterministic synthetic estimator.
double fake_sim(const std::string& a, const std::string& b) {
  const uint64_t h = mix64(std::hash<std::string>{}(a) ^ std::hash<std::string>{}(b));
  return static_cast<double>(h % 10000) / 10000.0;
}

}  // namespace

TEST(SampleGold, IdentityWhenUnderCap) {
  const auto ids = make_ids(305);
  const auto sampled = sample_gold(ids, {720, 42});
  EXPECT_EQ(sampled, ids);
}

TEST(SampleGold, CapsAndIsDeterministic) {
  const auto ids = make_ids(1220);
  const auto a = sample_gold(ids, {720, 7});
  const auto b = sample_gold(ids, {720, 7});
  EXPECT_EQ(a.size(), 720u);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  const auto c = sample_gold(ids, {720, 8});
  EXPECT_NE(a, c);  // different seed, different subset
  for (const auto& id : a) EXPECT_TRUE(std::binary_search(ids.begin(), ids.end(), id));
}

TEST(BuildGraph, EdgeCountLaw) {
  for (const size_t n : {2u, 3u, 10u}) {
    const SimilarityGraph g = build_graph(make_ids(n), fake_sim);
    EXPECT_EQ(g.size(), n);
    EXPECT_EQ(g.edge_count(), n * (n - 1) / 2);
  }
  EXPECT_EQ(build_graph(make_ids(10), fake_sim).edge_count(), 45u);
}

TEST(BuildGraph, SymmetricAccess) {
  const SimilarityGraph g = build_graph(make_ids(6), fake_sim);
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = i + 1; j < g.size(); ++j)
      EXPECT_DOUBLE_EQ(g.weight(i, j), g.weight(j, i));
}

TEST(BuildGraph, ParallelMatchesSerialBitExactly) {
  const auto ids = make_ids(40);
  const SimilarityGraph serial = build_graph(ids, fake_sim, 1);
  const SimilarityGraph parallel = build_graph(ids, fake_sim, 8);
  EXPECT_TRUE(serial == parallel);
}

TEST(BuildGraph, EstimatorFailureNamesPair) {
  const auto ids = make_ids(4);
  auto failing = [](const std::string& a, const std::string& b) -> double {
    if (a == "s1001" && b == "s1002") throw Error("boom");
    return 0.5;
  };
  try {
    build_graph(ids, failing);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("s1001"), std::string::npos);
    EXPECT_NE(msg.find("s1002"), std::string::npos);
  }
}

TEST(BuildGraph, RejectsTooFewNodes) {
  EXPECT_THROW(build_graph(make_ids(1), fake_sim), Error);
}

TEST(BuildGraph, RejectsOutOfRangeScores) {
  auto bad = [](const std::string&, const std::string&) { return 1.5; };
  EXPECT_THROW(build_graph(make_ids(3), bad), Error);
}

TEST(Inflate, FactorOneIsIsomorphicWithIdentityMapping) {
  const SimilarityGraph g = random_complete_graph(5, 3);
  const auto [inflated, mapping] = graph_join_inflate(g, 1);
  EXPECT_EQ(inflated.size(), g.size());
  for (size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(mapping.copy_of.at(inflated.node(i)), g.node(i));
    EXPECT_EQ(mapping.copy_index.at(inflated.node(i)), 0u);
    for (size_t j = i + 1; j < g.size(); ++j)
      EXPECT_DOUBLE_EQ(inflated.weight(i, j), g.weight(i, j));
  }
}

TEST(Inflate, WeightRuleExhaustiveOnSmallGraphs) {
  std::mt19937_64 seeds(11);
  for (int trial = 0; trial < 10; ++trial) {
    const size_t n = 2 + bounded_draw(seeds, 9);  // up to 10 nodes
    const SimilarityGraph g = random_complete_graph(n, seeds());
    const size_t factor = 3;
    const auto [inflated, mapping] = graph_join_inflate(g, factor);
    ASSERT_EQ(inflated.size(), factor * n);
    EXPECT_EQ(inflated.edge_count(), factor * n * (factor * n - 1) / 2);
    for (size_t a = 0; a < inflated.size(); ++a) {
      for (size_t b = a + 1; b < inflated.size(); ++b) {
        const std::string& oa = mapping.copy_of.at(inflated.node(a));
        const std::string& ob = mapping.copy_of.at(inflated.node(b));
        if (oa == ob)
          EXPECT_DOUBLE_EQ(inflated.weight(a, b), 1.0);
        else
          EXPECT_DOUBLE_EQ(inflated.weight(a, b), g.weight_between(oa, ob));
      }
    }
  }
}

TEST(Inflate, TripleOf305NodesGives915Nodes) {
  const SimilarityGraph g = build_graph(make_ids(305), fake_sim, 4);
  const auto [inflated, mapping] = graph_join_inflate(g, 3);
  EXPECT_EQ(inflated.size(), 915u);
  EXPECT_EQ(inflated.edge_count(), 418155u);
}

TEST(Inflate, SyntheticIdsCarryCopyIndex) {
  const SimilarityGraph g = random_complete_graph(3, 1);
  const auto [inflated, mapping] = graph_join_inflate(g, 3);
  EXPECT_TRUE(inflated.contains("n0#0"));
  EXPECT_TRUE(inflated.contains("n0#2"));
  EXPECT_EQ(mapping.copy_index.at("n2#1"), 1u);
}

TEST(InducedSubgraph, KeepAllIsEqual) {
  const SimilarityGraph g = random_complete_graph(6, 5);
  EXPECT_TRUE(induced_subgraph(g, g.nodes()) == g);
}

TEST(InducedSubgraph, PairKeepsOriginalWeight) {
  const SimilarityGraph g = random_complete_graph(6, 5);
  const SimilarityGraph sub = induced_subgraph(g, {"n1", "n4"});
  EXPECT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(sub.weight(0, 1), g.weight_between("n1", "n4"));
}

TEST(InducedSubgraph, CompletenessPreserved) {
  const SimilarityGraph g = random_complete_graph(10, 9);
  const SimilarityGraph sub = induced_subgraph(g, {"n0", "n3", "n5", "n9"});
  EXPECT_EQ(sub.edge_count(), 6u);
}

TEST(InducedSubgraph, UnknownNodeRejected) {
  const SimilarityGraph g = random_complete_graph(4, 2);
  EXPECT_THROW(induced_subgraph(g, {"n0", "ghost"}), Error);
}

TEST(ExportImport, CsvLineFormat) {
  SimilarityGraph g{std::vector<std::string>{"a", "b"}};
  g.set_weight(0, 1, 0.5);
  std::ostringstream out;
  export_edge_list(g, out);
  EXPECT_EQ(out.str(), "a,b,0.500000\n");
}

TEST(ExportImport, RoundTripWithinTolerance) {
  TempDir tmp;
  const SimilarityGraph g = random_complete_graph(12, 77);
  const auto path = tmp / "graph.csv";
  export_edge_list(g, path);
  const SimilarityGraph back = import_edge_list(path);
  ASSERT_EQ(back.size(), g.size());
  EXPECT_EQ(back.nodes(), g.nodes());
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = i + 1; j < g.size(); ++j)
      EXPECT_NEAR(back.weight(i, j), g.weight(i, j), 1e-6);
}

TEST(ExportImport, IncompleteEdgeListRejected) {
  TempDir tmp;
  write_file(tmp / "bad.csv", "a,b,0.5\na,c,0.5\n");  // missing b,c
  EXPECT_THROW(import_edge_list(tmp / "bad.csv"), Error);
}

TEST(ExportImport, DuplicateEdgeRejected) {
  TempDir tmp;
  write_file(tmp / "bad.csv", "a,b,0.5\nb,a,0.6\n");
  EXPECT_THROW(import_edge_list(tmp / "bad.csv"), Error);
}

TEST(ExportDot, OneEdgePerPair) {
  const SimilarityGraph g = random_complete_graph(5, 4);
  std::ostringstream out;
  export_dot(g, out);
  const std::string dot = out.str();
  size_t edges = 0, pos = 0;
  while ((pos = dot.find("--", pos)) != std::string::npos) {
    ++edges;
    pos += 2;
  }
  EXPECT_EQ(edges, g.edge_count());
}
