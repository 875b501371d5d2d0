#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "aeval/clustering.hpp"
#include "aeval/core.hpp"
#include "aeval/corpus.hpp"
#include "aeval/graph.hpp"
#include "aeval/louvain.hpp"
#include "aeval/metrics.hpp"
#include "aeval/runner.hpp"
#include "aeval/similarity.hpp"

namespace aeval {

// Nearest approach representative for one incorrect submission. `score` is the
// maximum of `all_scores`; ties break toward the lowest cluster index.
struct ApproachAssignment {
  std::string submission_id;
  std::string best_rep;
  size_t best_cluster = 0;
  double score = 0.0;
  std::vector<double> all_scores;  // indexed by cluster
};

// Affine stand-in for a learned marking model: a weighted combination of
// structural similarity and test pass fraction.
struct MarkingModel {
  double weight_structural = 0.6;
  double weight_tests = 0.4;
  double full_marks = 10.0;

  void validate() const {
    if (weight_structural < 0 || weight_tests < 0 ||
        std::abs(weight_structural + weight_tests - 1.0) > 1e-9)
      throw Error("marking model: weights must be nonnegative and sum to 1");
    if (full_marks <= 0) throw Error("marking model: full_marks must be positive");
  }
};

enum class SubmissionStatus { Gold, Incorrect };

struct MarkRow {
  std::string id;
  SubmissionStatus status = SubmissionStatus::Incorrect;
  double pass_fraction = 0.0;
  std::optional<size_t> approach;
  std::optional<double> structural_score;
  double marks = 0.0;
};

struct MarkSheet {
  std::vector<MarkRow> rows;  // sorted by id
};

inline double round_half_up_2dp(double x) { return std::floor(x * 100.0 + 0.5) / 100.0; }

// Scores every incorrect submission against every approach representative.
inline std::vector<ApproachAssignment> assign_approaches(const std::vector<std::string>& incorrect,
                                                         const Representatives& reps,
                                                         const Corpus& corpus,
                                                         const Estimator& estimator,
                                                         int jobs = 1) {
  if (reps.reps.empty())
    throw Error("no approach representatives: no gold-standard solutions were found; "
                "the corpus needs manual grading");
  std::vector<std::string> ids = incorrect;
  std::sort(ids.begin(), ids.end());

  std::vector<ApproachAssignment> out(ids.size());
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(ids.size());

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= ids.size()) return;
      try {
        ApproachAssignment a;
        a.submission_id = ids[i];
        const Submission& sub = corpus.at(ids[i]);
        a.all_scores.reserve(reps.reps.size());
        for (size_t c = 0; c < reps.reps.size(); ++c) {
          const double s = estimator.score(sub, corpus.at(reps.reps[c]));
          check_unit_interval(s, "similarity(" + sub.id + "," + reps.reps[c] + ")");
          a.all_scores.push_back(s);
          if (c == 0 || s > a.score) {
            a.score = s;
            a.best_cluster = c;
            a.best_rep = reps.reps[c];
          }
        }
        out[i] = std::move(a);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int workers = std::max(1, jobs);
  if (workers == 1 || ids.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Gold submissions get full marks. Incorrect ones get the weighted combination
// of structural similarity and pass fraction, rounded half-up to 2 decimals and
// kept strictly below full marks. Incorrect submissions with no assignment
// (degraded runs) are marked on pass fraction alone.
inline MarkSheet compute_marks(const std::vector<ApproachAssignment>& assignments,
                               const Partition& partition, const MarkingModel& model) {
  model.validate();
  std::map<std::string, const ApproachAssignment*> by_id;
  for (const ApproachAssignment& a : assignments) by_id[a.submission_id] = &a;

  MarkSheet sheet;
  auto emit = [&](const std::string& id, SubmissionStatus status) {
    MarkRow row;
    row.id = id;
    row.status = status;
    row.pass_fraction = partition.pass_fraction.at(id);
    if (status == SubmissionStatus::Gold) {
      row.marks = model.full_marks;
    } else {
      double structural_term = 0.0;
      auto it = by_id.find(id);
      if (it != by_id.end()) {
        row.approach = it->second->best_cluster;
        row.structural_score = it->second->score;
        structural_term = model.weight_structural * it->second->score +
                          model.weight_tests * row.pass_fraction;
      } else {
        structural_term = row.pass_fraction;
      }
      row.marks = round_half_up_2dp(model.full_marks * structural_term);
      if (row.marks >= model.full_marks) row.marks = model.full_marks - 0.01;
      if (row.marks < 0) row.marks = 0;
    }
    sheet.rows.push_back(std::move(row));
  };

  for (const std::string& id : partition.gold) emit(id, SubmissionStatus::Gold);
  for (const std::string& id : partition.incorrect) emit(id, SubmissionStatus::Incorrect);
  std::sort(sheet.rows.begin(), sheet.rows.end(),
            [](const MarkRow& a, const MarkRow& b) { return a.id < b.id; });
  return sheet;
}

enum class EstimatorKind { Winnow, Rubric, External };

struct EvaluateConfig {
  uint64_t seed = 0;
  size_t cap = 720;
  EstimatorKind estimator = EstimatorKind::Winnow;
  WinnowParams winnow;
  std::string adapter_command;
  std::optional<std::filesystem::path> feature_vectors_path;  // overrides manifest
  MarkingModel model;
  RunnerConfig runner;
  int jobs = 1;
  std::filesystem::path out_dir;
  double review_fraction = 0.02;          // clusters smaller than this share are flagged
  double low_similarity_threshold = 0.2;  // assignments below are flagged in reports
};

struct EvaluateResult {
  Partition partition;
  std::vector<std::string> sampled_gold;
  std::optional<Clustering> clustering;
  Representatives representatives;
  std::vector<ApproachAssignment> assignments;
  MarkSheet marksheet;
  bool degraded = false;  // fewer than 2 gold solutions: no graph or clustering
};

namespace detail {

inline std::unique_ptr<Estimator> make_estimator(const Corpus& corpus, const EvaluateConfig& cfg) {
  switch (cfg.estimator) {
    case EstimatorKind::Winnow:
      return std::make_unique<WinnowEstimator>(cfg.winnow);
    case EstimatorKind::Rubric: {
      if (!corpus.config.rubric)
        throw Error("rubric estimator requires rubric_path in the manifest");
      std::filesystem::path vectors_path;
      if (cfg.feature_vectors_path)
        vectors_path = *cfg.feature_vectors_path;
      else if (corpus.config.feature_vectors_path)
        vectors_path = *corpus.config.feature_vectors_path;
      else
        throw Error("rubric estimator requires feature vectors (manifest key "
                    "feature_vectors_path or --features)");
      return std::make_unique<RubricEstimator>(
          *corpus.config.rubric, load_feature_vectors(vectors_path, *corpus.config.rubric));
    }
    case EstimatorKind::External:
      if (cfg.adapter_command.empty())
        throw Error("external estimator requires an adapter command");
      return std::make_unique<ExternalEstimator>(cfg.adapter_command, corpus.config.root,
                                                 cfg.out_dir / "scratch");
  }
  throw Error("unknown estimator kind");
}

inline std::string partition_csv(const Partition& p) {
  std::ostringstream out;
  out << "submission_id,status,pass_fraction\n";
  std::vector<std::string> ids;
  for (const auto& [id, _] : p.pass_fraction) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (const std::string& id : ids)
    out << id << ',' << (p.gold.count(id) ? "gold" : "incorrect") << ','
        << format_fixed(p.pass_fraction.at(id), 6) << '\n';
  return out.str();
}

inline std::string clustering_json(const Clustering& c, const Representatives& reps,
                                   double review_fraction, size_t population) {
  const double threshold = review_fraction * static_cast<double>(population);
  nlohmann::json arr = nlohmann::json::array();
  for (size_t i = 0; i < c.clusters.size(); ++i) {
    nlohmann::json entry;
    entry["cluster_id"] = i;
    entry["size"] = c.clusters[i].size();
    entry["member_ids"] = c.clusters[i];
    entry["representative_id"] = reps.reps[i];
    entry["flagged_for_review"] = static_cast<double>(c.clusters[i].size()) < threshold;
    arr.push_back(std::move(entry));
  }
  return arr.dump(2) + "\n";
}

inline std::string assignments_csv(const std::vector<ApproachAssignment>& assignments) {
  std::ostringstream out;
  out << "submission_id,best_cluster,best_rep,score,all_scores\n";
  for (const ApproachAssignment& a : assignments) {
    out << a.submission_id << ',' << a.best_cluster << ',' << a.best_rep << ','
        << format_fixed(a.score, 6) << ',';
    for (size_t i = 0; i < a.all_scores.size(); ++i) {
      if (i) out << ';';
      out << i << ':' << format_fixed(a.all_scores[i], 6);
    }
    out << '\n';
  }
  return out.str();
}

inline std::string marksheet_csv(const MarkSheet& sheet) {
  std::ostringstream out;
  out << "submission_id,status,pass_fraction,approach,structural_score,marks\n";
  for (const MarkRow& row : sheet.rows) {
    out << row.id << ',' << (row.status == SubmissionStatus::Gold ? "gold" : "incorrect") << ','
        << format_fixed(row.pass_fraction, 6) << ',';
    if (row.approach) out << *row.approach;
    out << ',';
    if (row.structural_score) out << format_fixed(*row.structural_score, 6);
    out << ',' << format_fixed(row.marks, 2) << '\n';
  }
  return out.str();
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace detail

// Runs the whole evaluation: partition by tests, sample the gold set, build the
// similarity graph, cluster, pick representatives, assign approaches to the
// incorrect submissions and compute marks. All artifacts land in cfg.out_dir.
// Deterministic for a fixed corpus, config and seed.
inline EvaluateResult evaluate(const std::filesystem::path& corpus_root, EvaluateConfig cfg) {
  namespace fs = std::filesystem;
  cfg.model.validate();
  if (cfg.out_dir.empty()) throw StageError("setup", "output directory not set");
  fs::create_directories(cfg.out_dir);
  if (cfg.runner.workdir.empty() || cfg.runner.workdir == fs::path("aeval_work"))
    cfg.runner.workdir = cfg.out_dir / "work";
  cfg.runner.jobs = cfg.jobs;

  const Corpus corpus =
      detail::stage("load", [&] { return load_corpus(corpus_root); });

  const Partition part = detail::stage("partition", [&] {
    const OutcomeTable outcomes = run_all(corpus, cfg.runner);
    return partition(corpus, outcomes);
  });
  write_text_file(cfg.out_dir / "partition.csv", detail::partition_csv(part));

  EvaluateResult result;
  result.partition = part;

  if (part.gold.size() < 2) {
    result.degraded = true;
    std::cerr << "warning: only " << part.gold.size()
              << " gold-standard solution(s); skipping approach discovery, marking on pass "
                 "fraction alone\n";
  } else {
    const std::unique_ptr<Estimator> estimator =
        detail::stage("estimator", [&] { return detail::make_estimator(corpus, cfg); });

    result.sampled_gold = detail::stage("sample", [&] {
      const std::vector<std::string> gold(part.gold.begin(), part.gold.end());
      return sample_gold(gold, SampleConfig{cfg.cap, cfg.seed});
    });

    const SimilarityGraph graph = detail::stage("graph", [&] {
      return build_graph(
          result.sampled_gold,
          [&](const std::string& a, const std::string& b) {
            return estimator->score(corpus.at(a), corpus.at(b));
          },
          cfg.jobs);
    });
    export_edge_list(graph, cfg.out_dir / "graph.csv");

    result.clustering = detail::stage("cluster", [&] { return louvain(graph, cfg.seed); });
    result.representatives =
        detail::stage("cluster", [&] { return pick_representatives(*result.clustering, cfg.seed); });
    write_text_file(cfg.out_dir / "clustering.json",
                    detail::clustering_json(*result.clustering, result.representatives,
                                            cfg.review_fraction, result.sampled_gold.size()));

    if (!part.incorrect.empty()) {
      result.assignments = detail::stage("assign", [&] {
        const std::vector<std::string> incorrect(part.incorrect.begin(), part.incorrect.end());
        return assign_approaches(incorrect, result.representatives, corpus, *estimator, cfg.jobs);
      });
    }
    write_text_file(cfg.out_dir / "assignments.csv", detail::assignments_csv(result.assignments));
  }

  result.marksheet =
      detail::stage("marks", [&] { return compute_marks(result.assignments, part, cfg.model); });
  write_text_file(cfg.out_dir / "marksheet.csv", detail::marksheet_csv(result.marksheet));

  return result;
}

// Plain-text summary of an evaluation output directory: cluster sizes, clusters
// flagged for review, low-similarity assignments and the mark distribution.
inline std::string render_report(const std::filesystem::path& out_dir,
                                 double low_similarity_threshold = 0.2) {
  namespace fs = std::filesystem;
  std::ostringstream out;

  const fs::path marksheet_path = out_dir / "marksheet.csv";
  if (!fs::exists(marksheet_path))
    throw Error("no marksheet.csv in " + out_dir.string() + "; run evaluate first");

  struct Row {
    std::string id;
    bool gold;
    double marks;
  };
  std::vector<Row> rows;
  double full_marks = 0.0;
  {
    auto lines = nonblank_lines(read_text_file(marksheet_path));
    for (size_t i = 1; i < lines.size(); ++i) {
      const auto f = split_csv_line(lines[i]);
      if (f.size() != 6) throw Error(marksheet_path.string() + ": bad row '" + lines[i] + "'");
      Row r{f[0], f[1] == "gold", parse_double_strict(f[5], "marks")};
      if (r.gold) full_marks = std::max(full_marks, r.marks);
      rows.push_back(std::move(r));
    }
  }
  size_t gold = 0;
  for (const Row& r : rows) gold += r.gold ? 1 : 0;
  out << "submissions: " << rows.size() << " (gold " << gold << ", incorrect "
      << rows.size() - gold << ")\n";

  const fs::path clustering_path = out_dir / "clustering.json";
  if (fs::exists(clustering_path)) {
    const auto arr = nlohmann::json::parse(read_text_file(clustering_path));
    size_t flagged = 0;
    for (const auto& c : arr) flagged += c.value("flagged_for_review", false) ? 1 : 0;
    out << "approach clusters: " << arr.size() << " (flagged for review: " << flagged << ")\n";
    for (const auto& c : arr) {
      out << "  cluster " << c["cluster_id"].get<size_t>() << ": size "
          << c["size"].get<size_t>() << ", representative " << c["representative_id"].get<std::string>();
      if (c.value("flagged_for_review", false)) out << "  [review]";
      out << '\n';
    }
  } else {
    out << "approach clusters: none (degraded run)\n";
  }

  const fs::path assignments_path = out_dir / "assignments.csv";
  if (fs::exists(assignments_path)) {
    auto lines = nonblank_lines(read_text_file(assignments_path));
    std::vector<std::pair<std::string, double>> low;
    for (size_t i = 1; i < lines.size(); ++i) {
      const auto f = split_csv_line(lines[i]);
      if (f.size() < 4) continue;
      const double score = parse_double_strict(f[3], "assignment score");
      if (score < low_similarity_threshold) low.emplace_back(f[0], score);
    }
    out << "low-similarity assignments (score < " << format_fixed(low_similarity_threshold, 2)
        << "): " << low.size() << '\n';
    for (const auto& [id, score] : low) out << "  " << id << " (" << format_fixed(score, 6) << ")\n";
  }

  if (full_marks <= 0) full_marks = 10.0;
  std::vector<size_t> buckets(10, 0);
  size_t full_count = 0;
  for (const Row& r : rows) {
    if (r.marks >= full_marks) {
      ++full_count;
      continue;
    }
    const double share = std::clamp(r.marks / full_marks, 0.0, 1.0);
    buckets[std::min<size_t>(9, static_cast<size_t>(share * 10.0))]++;
  }
  out << "mark distribution (full marks = " << format_fixed(full_marks, 2) << "):\n";
  for (size_t b = 0; b < buckets.size(); ++b)
    out << "  [" << format_fixed(full_marks * b / 10.0, 1) << ", "
        << format_fixed(full_marks * (b + 1) / 10.0, 1) << "): " << buckets[b] << '\n';
  out << "  full marks: " << full_count << '\n';
  return out.str();
}

}  // namespace aeval
