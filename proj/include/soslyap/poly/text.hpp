#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "soslyap/error.hpp"
#include "soslyap/poly/polynomial.hpp"

namespace soslyap {

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Renders p in the text grammar, e.g. "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1".
inline std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    const bool negative = std::signbit(c);
    const double mag = negative ? -c : c;
    if (first)
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    first = false;
    std::string mono;
    for (std::size_t i = 0; i < m.n_vars(); ++i) {
      if (m[i] == 0) continue;
      if (!mono.empty()) mono += '*';
      mono += 'x' + std::to_string(i + 1);
      if (m[i] > 1) mono += '^' + std::to_string(m[i]);
    }
    if (mono.empty())
      out += format_double(mag);
    else if (mag == 1.0)
      out += mono;
    else
      out += format_double(mag) + "*" + mono;
  }
  return out;
}

namespace detail {

class PolynomialParser {
 public:
  explicit PolynomialParser(std::string_view text) : text_(text) {}

  struct RawTerm {
    double coeff;
    std::vector<std::pair<std::size_t, int>> factors;  // (0-based var, exponent)
  };

  std::vector<RawTerm> parse_all() {
    std::vector<RawTerm> terms;
    skip_ws();
    if (at_end()) fail("empty polynomial");
    bool first = true;
    while (!at_end()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        advance();
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-' between terms");
      }
      first = false;
      RawTerm t = parse_term();
      t.coeff *= sign;
      terms.push_back(std::move(t));
      skip_ws();
    }
    return terms;
  }

 private:
  RawTerm parse_term() {
    RawTerm t{1.0, {}};
    bool have_coeff = false;
    if (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
      t.coeff = parse_number();
      have_coeff = true;
      skip_ws();
      if (at_end() || peek() != '*') return t;
      advance();
      skip_ws();
    }
    while (true) {
      if (at_end() || peek() != 'x') fail(have_coeff ? "expected variable after '*'" : "expected coefficient or variable");
      advance();
      std::size_t start = pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
      if (start == pos_) fail("expected variable index after 'x'");
      int index = std::stoi(std::string(text_.substr(start, pos_ - start)));
      if (index < 1) fail("variable indices start at 1");
      int exponent = 1;
      skip_ws();
      if (!at_end() && peek() == '^') {
        advance();
        skip_ws();
        std::size_t es = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (es == pos_) fail("expected integer exponent after '^'");
        exponent = std::stoi(std::string(text_.substr(es, pos_ - es)));
        skip_ws();
      }
      t.factors.emplace_back(static_cast<std::size_t>(index - 1), exponent);
      if (at_end() || peek() != '*') break;
      advance();
      skip_ws();
    }
    return t;
  }

  double parse_number() {
    std::size_t start = pos_;
    while (!at_end()) {
      char c = peek();
      bool exp_sign = (c == '+' || c == '-') && pos_ > start &&
                      (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || exp_sign)
        advance();
      else
        break;
    }
    double v = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed coefficient");
    }
    return v;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void advance() { ++pos_; }
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what, line, col);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the text grammar. With `n_vars` unset the variable count is the
/// largest index mentioned (at least 1).
inline Polynomial parse_polynomial(std::string_view text, std::optional<std::size_t> n_vars = std::nullopt) {
  auto terms = detail::PolynomialParser(text).parse_all();
  std::size_t max_index = 0;
  for (const auto& t : terms)
    for (const auto& [v, e] : t.factors) max_index = std::max(max_index, v + 1);
  const std::size_t n = n_vars.value_or(std::max<std::size_t>(max_index, 1));
  if (max_index > n)
    throw ParseError("variable x" + std::to_string(max_index) + " exceeds the declared " +
                         std::to_string(n) + " variables",
                     1, 1);
  Polynomial p(n);
  for (const auto& t : terms) {
    std::vector<int> exps(n, 0);
    for (const auto& [v, e] : t.factors) exps[v] += e;
    p.add_term(Monomial(std::move(exps)), t.coeff);
  }
  return p;
}

}  // namespace soslyap
