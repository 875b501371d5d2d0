#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "aeval/core.hpp"

namespace aeval {

// Token classes for C-like sources. Identifiers, numeric literals and string/char
// literals are normalized: their spelling is dropped so that consistent renaming
// does not change the stream.
enum class TokenClass : uint8_t {
  Keyword,  // spelling kept
  Ident,    // normalized
  Number,   // normalized
  Op,       // spelling kept
  Punct,    // spelling kept
  Other,    // normalized (string/char literals, unknown bytes)
};

struct Token {
  TokenClass cls;
  std::string text;  // empty for Ident/Number/Other

  bool operator==(const Token&) const = default;
};

using TokenStream = std::vector<Token>;

namespace detail {

inline const std::unordered_set<std::string_view>& c_keywords() {
  static const std::unordered_set<std::string_view> kw = {
      "auto",     "break",    "case",     "char",   "const",    "continue",
      "default",  "do",       "double",   "else",   "enum",     "extern",
      "float",    "for",      "goto",     "if",     "inline",   "int",
      "long",     "register", "restrict", "return", "short",    "signed",
      "sizeof",   "static",   "struct",   "switch", "typedef",  "union",
      "unsigned", "void",     "volatile", "while",  "_Bool",    "_Complex",
      "_Imaginary"};
  return kw;
}

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

// Multi-character operators first so maximal munch wins.
inline const std::vector<std::string_view>& operators() {
  static const std::vector<std::string_view> ops = {
      "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
      "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "^=", "|=", "+",  "-",
      "*",   "/",   "%",   "<",  ">",  "=",  "!",  "&",  "|",  "^",  "~",  "?",
      ":",   "."};
  return ops;
}

inline bool is_punct(char c) {
  switch (c) {
    case '(': case ')': case '{': case '}': case '[': case ']': case ';': case ',': case '#':
      return true;
    default:
      return false;
  }
}

}  // namespace detail

// Total lexer: never fails, unknown bytes become Other tokens. Comments and
// whitespace are dropped. A numeric literal (including float/hex forms) becomes
// one Number token; string and char literals become one Other token each.
inline TokenStream tokenize(std::string_view source) {
  using namespace detail;
  TokenStream out;
  size_t i = 0;
  const size_t n = source.size();
  while (i < n) {
    const char c = source[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    // comments
    if (c == '/' && i + 1 < n && source[i + 1] == '/') {
      i += 2;
      while (i < n && source[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && source[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(source[i] == '*' && source[i + 1] == '/')) ++i;
      i = (i + 1 < n) ? i + 2 : n;  // unterminated comment swallows the tail
      continue;
    }
    if (is_ident_start(c)) {
      const size_t start = i;
      while (i < n && is_ident_char(source[i])) ++i;
      std::string_view word = source.substr(start, i - start);
      if (c_keywords().count(word))
        out.push_back({TokenClass::Keyword, std::string(word)});
      else
        out.push_back({TokenClass::Ident, {}});
      continue;
    }
    if (is_digit(c)) {
      // pp-number style scan: digits, letters, dots, exponent signs
      ++i;
      while (i < n) {
        const char d = source[i];
        if (is_ident_char(d) || d == '.') {
          ++i;
        } else if ((d == '+' || d == '-') && (source[i - 1] == 'e' || source[i - 1] == 'E' ||
                                              source[i - 1] == 'p' || source[i - 1] == 'P')) {
          ++i;
        } else {
          break;
        }
      }
      out.push_back({TokenClass::Number, {}});
      continue;
    }
    if (c == '"' || c == '\'') {
      const char quote = c;
      ++i;
      while (i < n && source[i] != quote && source[i] != '\n') {
        if (source[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i < n && source[i] == quote) ++i;  // unterminated literal ends at the line
      out.push_back({TokenClass::Other, {}});
      continue;
    }
    if (is_punct(c)) {
      out.push_back({TokenClass::Punct, std::string(1, c)});
      ++i;
      continue;
    }
    bool matched = false;
    for (std::string_view op : operators()) {
      if (source.substr(i, op.size()) == op) {
        out.push_back({TokenClass::Op, std::string(op)});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    out.push_back({TokenClass::Other, {}});
    ++i;
  }
  return out;
}

// Stable 64-bit code per token; equal tokens always map to the same code.
inline uint64_t token_code(const Token& t) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  auto eat = [&h](uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  eat(static_cast<uint8_t>(t.cls));
  for (char c : t.text) eat(static_cast<uint8_t>(c));
  return h;
}

}  // namespace aeval
