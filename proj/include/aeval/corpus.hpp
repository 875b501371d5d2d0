#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aeval/core.hpp"

namespace aeval {

struct Submission {
  std::string id;
  std::string source;            // UTF-8 program text, non-empty
  std::filesystem::path path;    // corpus-relative
};

struct TestCase {
  std::string id;
  std::string input;
  std::string expected;
  int64_t timeout_ms = 0;
};

struct TestSuite {
  std::vector<TestCase> cases;
};

struct FeatureRubric {
  struct Entry {
    std::string name;
    double weight;
  };
  std::vector<Entry> entries;
  double penalty_per_extra_statement = 0.0;  // <= 0

  void validate() const {
    double positive_sum = 0.0;
    for (const Entry& e : entries)
      if (e.weight > 0) positive_sum += e.weight;
    if (std::abs(positive_sum - 1.0) > 1e-9)
      throw Error("rubric: positive feature weights sum to " + format_fixed(positive_sum, 9) +
                  ", expected 1.0");
    if (penalty_per_extra_statement > 0)
      throw Error("rubric: penalty_per_extra_statement must be <= 0");
  }
};

// Manual feature vector for one submission: one boolean per rubric entry plus an
// extra-statement count. Produced by humans, consumed by the rubric estimator.
struct FeatureVector {
  std::vector<uint8_t> bits;
  long long extra_statements = 0;
};

struct GroundTruth {
  std::map<PairKey, double> pair_scores;
  std::map<std::string, std::string> approach_labels;

  std::optional<double> score(const std::string& a, const std::string& b) const {
    auto it = pair_scores.find(make_pair_key(a, b));
    if (it == pair_scores.end()) return std::nullopt;
    return it->second;
  }
};

struct CorpusConfig {
  std::filesystem::path root;
  std::optional<FeatureRubric> rubric;
  std::optional<std::filesystem::path> ground_truth_pairs_path;
  std::optional<std::filesystem::path> approach_labels_path;
  std::optional<std::filesystem::path> feature_vectors_path;
};

struct Corpus {
  std::vector<Submission> submissions;  // sorted by id
  TestSuite test_suite;
  CorpusConfig config;

  bool has(const std::string& id) const {
    auto it = std::lower_bound(submissions.begin(), submissions.end(), id,
                               [](const Submission& s, const std::string& key) { return s.id < key; });
    return it != submissions.end() && it->id == id;
  }

  const Submission& at(const std::string& id) const {
    auto it = std::lower_bound(submissions.begin(), submissions.end(), id,
                               [](const Submission& s, const std::string& key) { return s.id < key; });
    if (it == submissions.end() || it->id != id) throw Error("unknown submission id: " + id);
    return *it;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(submissions.size());
    for (const Submission& s : submissions) out.push_back(s.id);
    return out;
  }
};

namespace detail {

inline FeatureRubric parse_rubric(const nlohmann::json& j, const std::string& where) {
  FeatureRubric rubric;
  if (!j.contains("features") || !j["features"].is_array())
    throw Error(where + ": rubric needs a 'features' array");
  for (const auto& f : j["features"]) {
    if (!f.contains("name") || !f.contains("weight"))
      throw Error(where + ": rubric feature needs 'name' and 'weight'");
    rubric.entries.push_back({f["name"].get<std::string>(), f["weight"].get<double>()});
  }
  rubric.penalty_per_extra_statement = j.value("penalty_per_extra_statement", 0.0);
  rubric.validate();
  return rubric;
}

}  // namespace detail

inline FeatureRubric load_rubric(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("rubric " + path.string() + ": " + e.what());
  }
  return detail::parse_rubric(j, path.string());
}

// Loads manifest.json plus all submission sources and test files. Submissions are
// ordered lexicographically by id so every seeded downstream choice is reproducible.
inline Corpus load_corpus(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path)) throw Error("missing manifest: " + manifest_path.string());

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("manifest " + manifest_path.string() + ": " + e.what());
  }

  Corpus corpus;
  corpus.config.root = root;

  if (!manifest.contains("submissions") || !manifest["submissions"].is_array())
    throw Error(manifest_path.string() + ": missing 'submissions' array");
  for (const auto& entry : manifest["submissions"]) {
    Submission s;
    s.id = entry.value("id", "");
    s.path = entry.value("path", "");
    if (!is_valid_id(s.id))
      throw Error(manifest_path.string() + ": bad submission id '" + s.id + "'");
    s.source = read_text_file(root / s.path);
    if (s.source.empty()) throw Error("empty submission source: " + (root / s.path).string());
    corpus.submissions.push_back(std::move(s));
  }
  if (corpus.submissions.empty()) throw Error("empty corpus: " + root.string());

  std::sort(corpus.submissions.begin(), corpus.submissions.end(),
            [](const Submission& a, const Submission& b) { return a.id < b.id; });
  for (size_t i = 1; i < corpus.submissions.size(); ++i)
    if (corpus.submissions[i].id == corpus.submissions[i - 1].id)
      throw Error(manifest_path.string() + ": duplicate submission id '" +
                  corpus.submissions[i].id + "'");

  if (!manifest.contains("tests") || !manifest["tests"].is_array())
    throw Error(manifest_path.string() + ": missing 'tests' array");
  for (const auto& entry : manifest["tests"]) {
    TestCase t;
    t.id = entry.value("id", "");
    if (!is_valid_id(t.id)) throw Error(manifest_path.string() + ": bad test id '" + t.id + "'");
    t.input = read_text_file(root / entry.value("input_path", ""));
    t.expected = read_text_file(root / entry.value("expected_path", ""));
    t.timeout_ms = entry.value("timeout_ms", int64_t{0});
    if (t.timeout_ms <= 0)
      throw Error(manifest_path.string() + ": test '" + t.id + "' needs timeout_ms > 0");
    for (const TestCase& prev : corpus.test_suite.cases)
      if (prev.id == t.id)
        throw Error(manifest_path.string() + ": duplicate test id '" + t.id + "'");
    corpus.test_suite.cases.push_back(std::move(t));
  }
  if (corpus.test_suite.cases.empty())
    throw Error(manifest_path.string() + ": test suite is empty");

  if (manifest.contains("rubric_path"))
    corpus.config.rubric = load_rubric(root / manifest["rubric_path"].get<std::string>());
  if (manifest.contains("ground_truth_pairs_path"))
    corpus.config.ground_truth_pairs_path = root / manifest["ground_truth_pairs_path"].get<std::string>();
  if (manifest.contains("approach_labels_path"))
    corpus.config.approach_labels_path = root / manifest["approach_labels_path"].get<std::string>();
  if (manifest.contains("feature_vectors_path"))
    corpus.config.feature_vectors_path = root / manifest["feature_vectors_path"].get<std::string>();

  return corpus;
}

// Optional ground-truth artifacts named by the manifest. Scores outside [0,1]
// and unknown ids are rejected, never clamped or dropped.
inline GroundTruth load_ground_truth(const std::filesystem::path& root, const Corpus& corpus) {
  GroundTruth gt;
  const CorpusConfig& cfg = corpus.config;
  if (cfg.root != root && !cfg.root.empty() && root != cfg.root)
    throw Error("ground truth root does not match corpus root");

  if (cfg.ground_truth_pairs_path) {
    const auto& path = *cfg.ground_truth_pairs_path;
    const auto lines = nonblank_lines(read_text_file(path));
    for (const std::string& line : lines) {
      const auto fields = split_csv_line(line);
      if (fields.size() != 3)
        throw Error(path.string() + ": expected 'id,id,score' got '" + line + "'");
      for (int i = 0; i < 2; ++i)
        if (!corpus.has(fields[i]))
          throw Error(path.string() + ": unknown submission id '" + fields[i] + "'");
      const double score = parse_double_strict(fields[2], path.string());
      if (!(score >= 0.0 && score <= 1.0))
        throw Error(path.string() + ": score " + fields[2] + " outside [0,1] for pair (" +
                    fields[0] + "," + fields[1] + ")");
      const PairKey key = make_pair_key(fields[0], fields[1]);
      auto [it, inserted] = gt.pair_scores.emplace(key, score);
      if (!inserted && it->second != score)
        throw Error(path.string() + ": conflicting scores for pair (" + key.first + "," +
                    key.second + ")");
    }
  }

  if (cfg.approach_labels_path) {
    const auto& path = *cfg.approach_labels_path;
    const auto lines = nonblank_lines(read_text_file(path));
    for (const std::string& line : lines) {
      const auto fields = split_csv_line(line);
      if (fields.size() != 2)
        throw Error(path.string() + ": expected 'id,label' got '" + line + "'");
      if (!corpus.has(fields[0]))
        throw Error(path.string() + ": unknown submission id '" + fields[0] + "'");
      gt.approach_labels[fields[0]] = fields[1];
    }
  }

  return gt;
}

// Feature vector CSV: submission_id, one 0/1 column per rubric entry, then the
// extra-statement count.
inline std::map<std::string, FeatureVector> load_feature_vectors(
    const std::filesystem::path& path, const FeatureRubric& rubric) {
  std::map<std::string, FeatureVector> vectors;
  const auto lines = nonblank_lines(read_text_file(path));
  const size_t want = rubric.entries.size() + 2;
  for (const std::string& line : lines) {
    const auto fields = split_csv_line(line);
    if (fields.size() != want)
      throw Error(path.string() + ": expected " + std::to_string(want) + " fields, got " +
                  std::to_string(fields.size()) + " in '" + line + "'");
    FeatureVector fv;
    for (size_t i = 1; i + 1 < fields.size(); ++i) {
      const long long bit = parse_int_strict(fields[i], path.string());
      if (bit != 0 && bit != 1)
        throw Error(path.string() + ": feature value must be 0 or 1 in '" + line + "'");
      fv.bits.push_back(static_cast<uint8_t>(bit));
    }
    fv.extra_statements = parse_int_strict(fields.back(), path.string());
    if (!vectors.emplace(fields[0], std::move(fv)).second)
      throw Error(path.string() + ": duplicate feature vector for '" + fields[0] + "'");
  }
  return vectors;
}

}  // namespace aeval
