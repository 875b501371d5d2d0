#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "aeval/core.hpp"
#include "aeval/token.hpp"

namespace aeval {

struct WinnowParams {
  int k = 5;  // gram size
  int w = 4;  // window size

  void validate() const {
    if (k < 1) throw Error("winnow: gram size must be >= 1");
    if (w < 1) throw Error("winnow: window size must be >= 1");
  }
};

// Winnowing fingerprints of one token stream. `prints` is sorted and unique.
struct FingerprintSet {
  std::vector<uint64_t> prints;
  int k = 0;
  int w = 0;

  bool empty() const { return prints.empty(); }
};

namespace detail {

// Polynomial hashes of all k-grams of token codes, natural 2^64 wraparound.
inline std::vector<uint64_t> kgram_hashes(const TokenStream& ts, int k) {
  constexpr uint64_t kBase = 0x9ddfea08eb382d69ULL;
  const size_t n = ts.size();
  if (n < static_cast<size_t>(k)) return {};
  std::vector<uint64_t> codes(n);
  for (size_t i = 0; i < n; ++i) codes[i] = token_code(ts[i]);

  uint64_t pow = 1;  // kBase^(k-1)
  for (int i = 1; i < k; ++i) pow *= kBase;

  std::vector<uint64_t> hashes(n - k + 1);
  uint64_t h = 0;
  for (int i = 0; i < k; ++i) h = h * kBase + codes[i];
  hashes[0] = h;
  for (size_t i = 1; i + k <= n; ++i) {
    h = (h - codes[i - 1] * pow) * kBase + codes[i + k - 1];
    hashes[i] = h;
  }
  return hashes;
}

}  // namespace detail

// Standard winnowing: slide a window of w consecutive k-gram hashes and keep the
// minimum of each window, taking the rightmost position on ties. When fewer than
// w hashes exist the single window spans them all, so any stream with >= k tokens
// yields at least one fingerprint.
inline FingerprintSet winnow(const TokenStream& ts, WinnowParams params) {
  params.validate();
  FingerprintSet fp;
  fp.k = params.k;
  fp.w = params.w;
  const std::vector<uint64_t> hashes = detail::kgram_hashes(ts, params.k);
  if (hashes.empty()) return fp;

  const size_t g = hashes.size();
  const size_t w = static_cast<size_t>(params.w);
  std::vector<uint64_t>& selected = fp.prints;

  if (g <= w) {
    size_t best = 0;
    for (size_t i = 1; i < g; ++i)
      if (hashes[i] <= hashes[best]) best = i;  // rightmost minimum
    selected.push_back(hashes[best]);
  } else {
    // monotonic deque of (value, index); popping on >= keeps the rightmost minimum
    std::vector<std::pair<uint64_t, size_t>> dq;
    size_t head = 0;
    for (size_t i = 0; i < g; ++i) {
      while (dq.size() > head && dq.back().first >= hashes[i]) dq.pop_back();
      dq.emplace_back(hashes[i], i);
      if (i + 1 >= w) {
        const size_t window_start = i + 1 - w;
        while (dq[head].second < window_start) ++head;
        selected.push_back(dq[head].first);
      }
    }
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  return fp;
}

// Jaccard coefficient over fingerprint sets. Two empty sets count as identical,
// one empty set as completely different.
inline double jaccard(const FingerprintSet& a, const FingerprintSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  size_t inter = 0;
  auto ia = a.prints.begin(), ib = b.prints.begin();
  while (ia != a.prints.end() && ib != b.prints.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const size_t uni = a.prints.size() + b.prints.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace aeval
