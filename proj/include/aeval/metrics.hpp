#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "aeval/core.hpp"

namespace aeval {

using PairScoreMap = std::map<PairKey, double>;

// Agreement of an estimator with ground truth over the same pair set.
// explained_variance is undefined when the truth is constant; spearman is
// undefined with fewer than 2 pairs or a constant rank vector.
struct EstimatorMetrics {
  double mae = 0.0;
  std::optional<double> explained_variance;
  std::optional<double> spearman;
};

// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double population_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return std::nullopt;
  return cov / std::sqrt(va * vb);
}

}  // namespace detail

inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("spearman: vector size mismatch");
  if (a.size() < 2) return std::nullopt;
  return detail::pearson(average_ranks(a), average_ranks(b));
}

// MAE, explained variance 1 - Var(t-e)/Var(t), and Spearman rank correlation of
// an estimated pair-score map against a ground-truth map over identical keys.
inline EstimatorMetrics compare_estimators(const PairScoreMap& estimated,
                                           const PairScoreMap& truth) {
  if (estimated.size() != truth.size())
    throw Error("compare_estimators: pair sets differ in size (" +
                std::to_string(estimated.size()) + " vs " + std::to_string(truth.size()) + ")");
  std::vector<double> e, t;
  e.reserve(estimated.size());
  t.reserve(truth.size());
  auto it = truth.begin();
  for (const auto& [key, value] : estimated) {
    if (it->first != key)
      throw Error("compare_estimators: pair (" + key.first + "," + key.second +
                  ") missing from one input");
    e.push_back(value);
    t.push_back(it->second);
    ++it;
  }
  if (e.empty()) throw Error("compare_estimators: no pairs");

  EstimatorMetrics m;
  double abs_sum = 0.0;
  for (size_t i = 0; i < e.size(); ++i) abs_sum += std::abs(e[i] - t[i]);
  m.mae = abs_sum / static_cast<double>(e.size());

  const double var_t = detail::population_variance(t);
  if (var_t > 0.0) {
    std::vector<double> residual(e.size());
    for (size_t i = 0; i < e.size(); ++i) residual[i] = t[i] - e[i];
    m.explained_variance = 1.0 - detail::population_variance(residual) / var_t;
  }

  m.spearman = spearman(e, t);
  return m;
}

}  // namespace aeval
