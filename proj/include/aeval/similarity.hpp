#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "aeval/core.hpp"
#include "aeval/corpus.hpp"
#include "aeval/proc.hpp"
#include "aeval/token.hpp"
#include "aeval/winnow.hpp"

namespace aeval {

// Pairwise structural similarity in [0,1]. Implementations must be symmetric and
// safe for concurrent score() calls.
class Estimator {
public:
  virtual ~Estimator() = default;
  virtual double score(const Submission& a, const Submission& b) const = 0;
};

// Built-in estimator: Jaccard coefficient of winnowing fingerprint sets.
class WinnowEstimator : public Estimator {
public:
  explicit WinnowEstimator(WinnowParams params = {}) : params_(params) { params_.validate(); }

  double score(const Submission& a, const Submission& b) const override {
    return jaccard(prints_for(a), prints_for(b));
  }

  const WinnowParams& params() const { return params_; }

private:
  const FingerprintSet& prints_for(const Submission& s) const {
    std::scoped_lock lock(mutex_);
    auto it = cache_.find(s.id);
    if (it == cache_.end())
      it = cache_.emplace(s.id, winnow(tokenize(s.source), params_)).first;
    return it->second;
  }

  WinnowParams params_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, FingerprintSet> cache_;
};

// Rubric score for one pair of feature vectors: matched entries (equal booleans)
// add their weight, then the extra-statement count difference is penalized.
// Clamped to [0,1].
inline double similarity_rubric(const FeatureRubric& rubric, const FeatureVector& a,
                                const FeatureVector& b) {
  if (a.bits.size() != rubric.entries.size() || b.bits.size() != rubric.entries.size())
    throw Error("rubric: feature vector is missing an entry (expected " +
                std::to_string(rubric.entries.size()) + " features)");
  double score = 0.0;
  for (size_t i = 0; i < rubric.entries.size(); ++i)
    if (a.bits[i] == b.bits[i]) score += rubric.entries[i].weight;
  score += rubric.penalty_per_extra_statement *
           static_cast<double>(std::llabs(a.extra_statements - b.extra_statements));
  return std::clamp(score, 0.0, 1.0);
}

class RubricEstimator : public Estimator {
public:
  RubricEstimator(FeatureRubric rubric, std::map<std::string, FeatureVector> vectors)
      : rubric_(std::move(rubric)), vectors_(std::move(vectors)) {
    rubric_.validate();
  }

  double score(const Submission& a, const Submission& b) const override {
    return similarity_rubric(rubric_, vector_for(a.id), vector_for(b.id));
  }

private:
  const FeatureVector& vector_for(const std::string& id) const {
    auto it = vectors_.find(id);
    if (it == vectors_.end()) throw Error("rubric: no feature vector for submission '" + id + "'");
    return it->second;
  }

  FeatureRubric rubric_;
  std::map<std::string, FeatureVector> vectors_;
};

// Adapter for external similarity tools: the command gets two file paths as
// arguments and must print one decimal number in [0,1]. Results are cached per
// unordered pair, which also enforces symmetry.
class ExternalEstimator : public Estimator {
public:
  // `root` resolves corpus-relative submission paths; `scratch_dir` holds source
  // files for submissions that have no on-disk path.
  ExternalEstimator(std::string command, std::filesystem::path root,
                    std::filesystem::path scratch_dir, int64_t timeout_ms = 60000)
      : command_(std::move(command)),
        root_(std::move(root)),
        scratch_(std::move(scratch_dir)),
        timeout_ms_(timeout_ms) {
    if (command_.empty()) throw Error("external estimator: empty adapter command");
  }

  double score(const Submission& a, const Submission& b) const override {
    const PairKey key = make_pair_key(a.id, b.id);
    {
      std::scoped_lock lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const double value = invoke(a, b);
    std::scoped_lock lock(mutex_);
    return cache_.emplace(key, value).first->second;
  }

private:
  std::filesystem::path materialize(const Submission& s) const {
    if (!s.path.empty()) {
      const std::filesystem::path p = s.path.is_absolute() ? s.path : root_ / s.path;
      if (std::filesystem::exists(p)) return p;
    }
    std::filesystem::create_directories(scratch_);
    const std::string ext = s.path.has_extension() ? s.path.extension().string() : ".src";
    const std::filesystem::path p = scratch_ / (s.id + ext);
    write_text_file(p, s.source);
    return p;
  }

  double invoke(const Submission& a, const Submission& b) const {
    const std::string pair_name = "(" + a.id + "," + b.id + ")";
    const std::string cmd =
        command_ + " '" + materialize(a).string() + "' '" + materialize(b).string() + "'";
    const RunResult run = run_command(cmd, "", scratch_.empty() ? "." : scratch_, timeout_ms_);
    if (run.timed_out) throw Error("external estimator timed out on pair " + pair_name);
    if (run.exit_code != 0)
      throw Error("external estimator exited with code " + std::to_string(run.exit_code) +
                  " on pair " + pair_name);
    double value = 0.0;
    try {
      value = parse_double_strict(run.output, "external estimator output");
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " on pair " + pair_name);
    }
    if (!(value >= 0.0 && value <= 1.0))
      throw Error("external estimator returned " + format_fixed(value, 6) +
                  " outside [0,1] on pair " + pair_name);
    return value;
  }

  std::string command_;
  std::filesystem::path root_;
  std::filesystem::path scratch_;
  int64_t timeout_ms_;
  mutable std::mutex mutex_;
  mutable std::map<PairKey, double> cache_;
};

// Convenience for raw sources (CLI `similarity` command, tests).
inline double similarity_winnow(const std::string& source_a, const std::string& source_b,
                                WinnowParams params = {}) {
  return jaccard(winnow(tokenize(source_a), params), winnow(tokenize(source_b), params));
}

}  // namespace aeval
