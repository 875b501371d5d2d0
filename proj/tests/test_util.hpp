#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "aeval/core.hpp"
#include "aeval/graph.hpp"
#include "aeval/token.hpp"

namespace aeval::testutil {

class TempDir {
public:
  TempDir() {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("aeval_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  write_text_file(path, content);
}

// ---------------------------------------------------------------------------
// Corpus fixtures
// ---------------------------------------------------------------------------

struct CorpusSpec {
  std::vector<std::pair<std::string, std::string>> submissions;  // id -> source
  std::vector<std::tuple<std::string, std::string, std::string, int64_t>>
      tests;  // id, input, expected, timeout_ms
  std::string ground_truth_pairs;   // raw CSV; empty = absent
  std::string approach_labels;      // raw CSV; empty = absent
  std::string rubric_json;          // raw JSON; empty = absent
  std::string feature_vectors;      // raw CSV; empty = absent
  std::string outcomes;             // raw CSV written as outcomes.csv; empty = absent
};

inline void write_corpus(const std::filesystem::path& root, const CorpusSpec& spec) {
  nlohmann::json manifest;
  manifest["submissions"] = nlohmann::json::array();
  for (const auto& [id, source] : spec.submissions) {
    const std::string rel = "submissions/" + id + ".c";
    write_file(root / rel, source);
    manifest["submissions"].push_back({{"id", id}, {"path", rel}});
  }
  manifest["tests"] = nlohmann::json::array();
  for (const auto& [id, input, expected, timeout] : spec.tests) {
    const std::string in_rel = "tests/" + id + ".in";
    const std::string exp_rel = "tests/" + id + ".expected";
    write_file(root / in_rel, input);
    write_file(root / exp_rel, expected);
    manifest["tests"].push_back(
        {{"id", id}, {"input_path", in_rel}, {"expected_path", exp_rel}, {"timeout_ms", timeout}});
  }
  if (!spec.ground_truth_pairs.empty()) {
    write_file(root / "ground_truth_pairs.csv", spec.ground_truth_pairs);
    manifest["ground_truth_pairs_path"] = "ground_truth_pairs.csv";
  }
  if (!spec.approach_labels.empty()) {
    write_file(root / "approach_labels.csv", spec.approach_labels);
    manifest["approach_labels_path"] = "approach_labels.csv";
  }
  if (!spec.rubric_json.empty()) {
    write_file(root / "rubric.json", spec.rubric_json);
    manifest["rubric_path"] = "rubric.json";
  }
  if (!spec.feature_vectors.empty()) {
    write_file(root / "features.csv", spec.feature_vectors);
    manifest["feature_vectors_path"] = "features.csv";
  }
  if (!spec.outcomes.empty()) write_file(root / "outcomes.csv", spec.outcomes);
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Synthetic sum programs (one template per solution approach)
// ---------------------------------------------------------------------------

struct SumNames {
  std::string fn = "sum";
  std::string n = "n";
  std::string acc = "total";
  std::string idx = "k";
};

inline std::string recursive_sum_program(const SumNames& v = {}) {
  return "#include <stdio.h>\n"
         "int " + v.fn + "(int " + v.n + ") {\n"
         "  if (" + v.n + " <= 1) {\n"
         "    return 1;\n"
         "  }\n"
         "  return " + v.n + " + " + v.fn + "(" + v.n + " - 1);\n"
         "}\n"
         "int main(void) {\n"
         "  int " + v.n + ";\n"
         "  scanf(\"%d\", &" + v.n + ");\n"
         "  printf(\"%d\\n\", " + v.fn + "(" + v.n + "));\n"
         "  return 0;\n"
         "}\n";
}

inline std::string for_sum_program(const SumNames& v = {}) {
  return "#include <stdio.h>\n"
         "int main(void) {\n"
         "  int " + v.n + ";\n"
         "  int " + v.acc + " = 0;\n"
         "  int " + v.idx + ";\n"
         "  scanf(\"%d\", &" + v.n + ");\n"
         "  for (" + v.idx + " = 1; " + v.idx + " <= " + v.n + "; " + v.idx + "++) {\n"
         "    " + v.acc + " = " + v.acc + " + " + v.idx + ";\n"
         "  }\n"
         "  printf(\"%d\\n\", " + v.acc + ");\n"
         "  return 0;\n"
         "}\n";
}

inline std::string while_sum_program(const SumNames& v = {}) {
  return "#include <stdio.h>\n"
         "int main(void) {\n"
         "  int " + v.n + ";\n"
         "  int " + v.acc + " = 0;\n"
         "  int " + v.idx + " = 1;\n"
         "  scanf(\"%d\", &" + v.n + ");\n"
         "  while (" + v.idx + " <= " + v.n + ") {\n"
         "    " + v.acc + " += " + v.idx + ";\n"
         "    " + v.idx + "++;\n"
         "  }\n"
         "  printf(\"%d\\n\", " + v.acc + ");\n"
         "  return 0;\n"
         "}\n";
}

// Small benign edits so same-template submissions are similar but not identical.
inline std::string vary_program(std::string src, std::mt19937_64& rng) {
  const std::vector<std::string> fillers = {
      "  int unused0 = 0;\n", "  int helper1 = 7;\n", "  /* scratch */\n", ""};
  const std::string filler = fillers[bounded_draw(rng, fillers.size())];
  const std::string anchor = "scanf";
  const size_t pos = src.find(anchor);
  if (pos != std::string::npos && !filler.empty()) src.insert(src.rfind('\n', pos) + 1, filler);
  if (bounded_draw(rng, 2) == 0) src += "\n";
  return src;
}

// Breaks a program while keeping its structure recognizable.
inline std::string mutate_failing(std::string src, std::mt19937_64& rng) {
  const auto replace_first = [&src](std::string_view from, std::string_view to) {
    const size_t pos = src.find(from);
    if (pos != std::string::npos) src.replace(pos, from.size(), to);
  };
  switch (bounded_draw(rng, 3)) {
    case 0: replace_first("= 0;", "= 1;"); break;        // wrong init
    case 1: replace_first("<=", "<"); break;             // off by one
    case 2: replace_first("return 0;", "return 2;"); break;
  }
  return src;
}

struct TemplateCorpus {
  std::map<std::string, std::string> label_of;  // submission id -> template name
  std::vector<std::string> gold_ids;
  std::vector<std::string> incorrect_ids;
};

// A corpus of `per_template` submissions per approach template; the second half
// of each template's submissions is mutated and marked failing in outcomes.csv.
inline TemplateCorpus write_template_corpus(const std::filesystem::path& root, size_t per_template,
                                            uint64_t seed) {
  std::mt19937_64 rng(seed);
  CorpusSpec spec;
  spec.tests = {{"t1", "5\n", "15\n", 2000}, {"t2", "1\n", "1\n", 2000}, {"t3", "10\n", "55\n", 2000}};

  const std::vector<std::pair<std::string, std::function<std::string(const SumNames&)>>> templates = {
      {"recursive", [](const SumNames& v) { return recursive_sum_program(v); }},
      {"forloop", [](const SumNames& v) { return for_sum_program(v); }},
      {"whileloop", [](const SumNames& v) { return while_sum_program(v); }},
  };

  TemplateCorpus out;
  std::string outcomes;
  size_t serial = 0;
  for (const auto& [label, render] : templates) {
    for (size_t i = 0; i < per_template; ++i) {
      const std::string id = "s" + std::to_string(100 + serial++);
      SumNames names;
      names.n = "v" + std::to_string(bounded_draw(rng, 50));
      names.acc = "a" + std::to_string(bounded_draw(rng, 50));
      names.idx = "i" + std::to_string(bounded_draw(rng, 50));
      names.fn = "f" + std::to_string(bounded_draw(rng, 50));
      std::string src = vary_program(render(names), rng);
      const bool failing = i >= (per_template + 1) / 2;
      if (failing) {
        src = mutate_failing(src, rng);
        const size_t passes = bounded_draw(rng, 3);  // 0..2 of 3 cases pass
        outcomes += id + ",t1," + (passes > 0 ? "pass" : "fail") + "\n";
        outcomes += id + ",t2," + (passes > 1 ? "pass" : "fail") + "\n";
        outcomes += id + ",t3,fail\n";
        out.incorrect_ids.push_back(id);
      } else {
        outcomes += id + ",t1,pass\n" + id + ",t2,pass\n" + id + ",t3,pass\n";
        out.gold_ids.push_back(id);
      }
      spec.submissions.emplace_back(id, src);
      out.label_of[id] = label;
    }
  }
  spec.outcomes = outcomes;

  std::string labels;
  for (const auto& [id, label] : out.label_of) labels += id + "," + label + "\n";
  spec.approach_labels = labels;

  write_corpus(root, spec);
  return out;
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

// Reference winnowing: direct per-window hash products and a linear scan for the
// rightmost minimum of every window. No rolling update, no deque.
inline std::vector<uint64_t> winnow_oracle(const TokenStream& ts, int k, int w) {
  constexpr uint64_t kBase = 0x9ddfea08eb382d69ULL;
  const size_t n = ts.size();
  if (n < static_cast<size_t>(k)) return {};
  std::vector<uint64_t> hashes;
  for (size_t i = 0; i + k <= n; ++i) {
    uint64_t h = 0;
    for (int j = 0; j < k; ++j) h = h * kBase + token_code(ts[i + j]);
    hashes.push_back(h);
  }
  const size_t g = hashes.size();
  std::vector<uint64_t> selected;
  const size_t window = std::min<size_t>(w, g);
  for (size_t start = 0; start + window <= g; ++start) {
    size_t best = start;
    for (size_t i = start; i < start + window; ++i)
      if (hashes[i] <= hashes[best]) best = i;
    selected.push_back(hashes[best]);
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  return selected;
}

// Reference modularity: the definition, one term per ordered node pair.
inline double modularity_oracle(const SimilarityGraph& g, const std::vector<size_t>& membership) {
  const size_t n = g.size();
  double two_m = 0.0;
  std::vector<double> degree(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = g.weight(std::min(i, j), std::max(i, j));
      degree[i] += w;
      if (i < j) two_m += 2 * w;
    }
  if (two_m == 0.0) return 0.0;
  double q = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (membership[i] != membership[j]) continue;
      const double a = (i == j) ? 0.0 : g.weight(std::min(i, j), std::max(i, j));
      q += a - degree[i] * degree[j] / two_m;
    }
  return q / two_m;
}

// Enumerates every set partition of {0..n-1} as a membership vector
// (restricted growth strings).
inline void for_each_partition(size_t n, const std::function<void(const std::vector<size_t>&)>& fn) {
  std::vector<size_t> a(n, 0);
  std::function<void(size_t, size_t)> rec = [&](size_t i, size_t max_used) {
    if (i == n) {
      fn(a);
      return;
    }
    for (size_t c = 0; c <= max_used + 1 && c < n; ++c) {
      a[i] = c;
      rec(i + 1, std::max(max_used, c));
    }
  };
  if (n == 0) return;
  a[0] = 0;
  rec(1, 0);
}

// ---------------------------------------------------------------------------
// Random graphs
// ---------------------------------------------------------------------------

inline SimilarityGraph random_complete_graph(size_t n, uint64_t seed) {
  std::vector<std::string> nodes;
  for (size_t i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
  SimilarityGraph g{nodes};
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      g.set_weight(i, j, static_cast<double>(rng()) / static_cast<double>(UINT64_MAX));
  return g;
}

// Complete graph with planted clusters: within-cluster weights drawn from
// [within_lo, within_hi], cross-cluster from [cross_lo, cross_hi].
inline std::pair<SimilarityGraph, std::vector<size_t>> planted_partition_graph(
    const std::vector<size_t>& cluster_sizes, double within_lo, double within_hi, double cross_lo,
    double cross_hi, uint64_t seed) {
  std::vector<std::string> nodes;
  std::vector<size_t> membership;
  for (size_t c = 0; c < cluster_sizes.size(); ++c)
    for (size_t i = 0; i < cluster_sizes[c]; ++i) {
      nodes.push_back("c" + std::to_string(c) + "_" + std::to_string(i));
      membership.push_back(c);
    }
  SimilarityGraph g{nodes};
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()) / static_cast<double>(UINT64_MAX));
  };
  for (size_t i = 0; i < membership.size(); ++i)
    for (size_t j = i + 1; j < membership.size(); ++j)
      g.set_weight(i, j, membership[i] == membership[j] ? uniform(within_lo, within_hi)
                                                        : uniform(cross_lo, cross_hi));
  return {std::move(g), std::move(membership)};
}

}  // namespace aeval::testutil
