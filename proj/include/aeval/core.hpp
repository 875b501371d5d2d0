#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aeval {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Error attributed to a named pipeline stage; the CLI prints the tag.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

// Unordered submission pair: key.first <= key.second always.
using PairKey = std::pair<std::string, std::string>;

inline PairKey make_pair_key(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("read failed: " + path.string());
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path.string());
}

inline std::string_view trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return s.substr(b, e - b);
}

// Plain comma split, no quoting: ids are restricted to a CSV-safe charset.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.emplace_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

// Splits into lines, tolerating \r\n and a missing final newline. Blank lines dropped.
inline std::vector<std::string> nonblank_lines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = trim(text.substr(start, i - start));
      if (!line.empty()) lines.emplace_back(line);
      start = i + 1;
    }
  }
  return lines;
}

// Submission/test ids travel through CSV files and the filesystem.
inline bool is_valid_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.' || c == '#';
    if (!ok) return false;
  }
  return true;
}

inline double parse_double_strict(std::string_view text, const std::string& what) {
  const std::string s{trim(text)};
  if (s.empty()) throw Error(what + ": empty number");
  size_t pos = 0;
  double value = 0;
  try {
    value = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error(what + ": not a number: '" + s + "'");
  }
  if (pos != s.size()) throw Error(what + ": trailing junk in number: '" + s + "'");
  return value;
}

inline long long parse_int_strict(std::string_view text, const std::string& what) {
  const std::string s{trim(text)};
  size_t pos = 0;
  long long value = 0;
  try {
    value = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw Error(what + ": not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw Error(what + ": trailing junk in integer: '" + s + "'");
  return value;
}

inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

inline void check_unit_interval(double value, const std::string& what) {
  if (!(value >= 0.0 && value <= 1.0))
    throw Error(what + ": value " + format_fixed(value, 6) + " outside [0,1]");
}

// splitmix64; used to derive independent sub-seeds from one master seed.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) { return mix64(mix64(a, b), c); }

// Unbiased draw in [0,n) from a 64-bit engine; avoids the implementation-defined
// std::uniform_int_distribution so sequences are identical across toolchains.
template <typename Rng>
uint64_t bounded_draw(Rng& rng, uint64_t n) {
  if (n == 0) throw Error("bounded_draw: empty range");
  const uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
  uint64_t x = rng();
  while (x < reject_below) x = rng();
  return x % n;
}

template <typename Rng, typename T>
void shuffle_seeded(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(bounded_draw(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace aeval
