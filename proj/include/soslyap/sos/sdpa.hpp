#pragma once

#include <charconv>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "soslyap/error.hpp"
#include "soslyap/poly/text.hpp"
#include "soslyap/sos/sdp_problem.hpp"

namespace soslyap {

/// SDPA sparse text (.dat-s) for `p`, read as the SDPA dual
/// max F0.Y s.t. Fi.Y = c_i, Y >= 0. Nonzero Gram blocks keep their order;
/// free variables become a trailing LP block of 2*n_free entries (u+ then u-).
/// The header comment records the exact block layout for parse_sdpa.
inline std::string export_sdpa(const SdpProblem& p) {
  p.validate();
  std::vector<long> sdpa_block(p.blocks.size(), 0);
  std::vector<long> structure;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    if (p.blocks[b] == 0) continue;
    structure.push_back(static_cast<long>(p.blocks[b]));
    sdpa_block[b] = static_cast<long>(structure.size());
  }
  const long lp_block = p.n_free > 0 ? static_cast<long>(structure.size()) + 1 : 0;
  if (p.n_free > 0) structure.push_back(-2 * static_cast<long>(p.n_free));

  std::ostringstream out;
  out << "* soslyap-sdp v1 blocks=";
  for (std::size_t b = 0; b < p.blocks.size(); ++b) out << (b ? "," : "") << p.blocks[b];
  if (p.blocks.empty()) out << "-";
  out << " n_free=" << p.n_free << " objective=" << (p.objective ? 1 : 0) << "\n";
  out << p.constraints.size() << " =mdim\n";
  if (structure.empty()) {
    // SDPA needs at least one block: a 1x1 block no constraint touches.
    structure.push_back(1);
  }
  out << structure.size() << " =nblocks\n";
  for (std::size_t i = 0; i < structure.size(); ++i) out << (i ? " " : "") << structure[i];
  out << "\n";
  for (std::size_t i = 0; i < p.constraints.size(); ++i) out << (i ? " " : "") << format_double(p.constraints[i].rhs);
  out << "\n";
  if (p.objective) {
    for (std::size_t j = 0; j < p.n_free; ++j) {
      const double c = (*p.objective)[j];
      out << "0 " << lp_block << " " << j + 1 << " " << j + 1 << " " << format_double(c) << "\n";
      out << "0 " << lp_block << " " << p.n_free + j + 1 << " " << p.n_free + j + 1 << " " << format_double(-c) << "\n";
    }
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    for (const auto& e : c.gram)
      out << i + 1 << " " << sdpa_block[e.block] << " " << e.row + 1 << " " << e.col + 1 << " " << format_double(e.value)
          << "\n";
    for (const auto& f : c.free) {
      out << i + 1 << " " << lp_block << " " << f.index + 1 << " " << f.index + 1 << " " << format_double(f.value) << "\n";
      out << i + 1 << " " << lp_block << " " << p.n_free + f.index + 1 << " " << p.n_free + f.index + 1 << " "
          << format_double(-f.value) << "\n";
    }
  }
  return out.str();
}

namespace detail {

class SdpaReader {
 public:
  explicit SdpaReader(std::string_view text) : text_(text) {}

  struct Token {
    std::string_view text;
    std::size_t line = 0;
    std::size_t column = 0;
  };

  /// Next token; SDPA punctuation {}(),= counts as whitespace.
  std::optional<Token> next() {
    while (pos_ < text_.size() && (text_[pos_] == '\n' || is_separator(text_[pos_]))) advance();
    if (pos_ >= text_.size()) return std::nullopt;
    Token t{{}, line_, column_};
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_separator(text_[pos_]) && text_[pos_] != '\n') advance();
    t.text = text_.substr(start, pos_ - start);
    return t;
  }

  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') advance();
  }

  /// Comment lines (starting with * or ") before the data; returns them.
  std::vector<std::string> leading_comments() {
    std::vector<std::string> out;
    while (pos_ < text_.size()) {
      std::size_t p = pos_;
      while (p < text_.size() && (text_[p] == ' ' || text_[p] == '\t' || text_[p] == '\r')) ++p;
      if (p < text_.size() && text_[p] == '\n') {
        while (pos_ <= p) advance();
        continue;
      }
      if (p < text_.size() && (text_[p] == '*' || text_[p] == '"')) {
        const std::size_t start = p;
        while (pos_ < p) advance();
        skip_line();
        out.emplace_back(text_.substr(start, pos_ - start));
        continue;
      }
      break;
    }
    return out;
  }

  Token require(const char* what) {
    auto t = next();
    if (!t) throw ParseError(std::string("unexpected end of input, expected ") + what, line_, column_);
    return *t;
  }

  static long to_long(const Token& t, const char* what) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
      throw ParseError(std::string("expected an integer for ") + what + ", found '" + std::string(t.text) + "'", t.line,
                       t.column);
    return v;
  }

  static double to_double(const Token& t, const char* what) {
    std::string_view s = t.text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw ParseError(std::string("expected a number for ") + what + ", found '" + std::string(t.text) + "'", t.line,
                       t.column);
    return v;
  }

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static bool is_separator(char ch) {
    return ch == ' ' || ch == '\t' || ch == '\r' || ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')' ||
           ch == '=';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

struct SdpaLayout {
  std::vector<std::size_t> blocks;
  std::size_t n_free = 0;
  bool objective = false;
};

inline std::optional<SdpaLayout> parse_layout_comment(const std::string& line) {
  const std::string tag = "* soslyap-sdp v1 ";
  if (line.rfind(tag, 0) != 0) return std::nullopt;
  SdpaLayout layout;
  std::istringstream in(line.substr(tag.size()));
  std::string field;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) return std::nullopt;
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "blocks") {
      if (val == "-") continue;
      std::istringstream parts(val);
      std::string part;
      while (std::getline(parts, part, ',')) {
        std::size_t b = 0;
        if (std::from_chars(part.data(), part.data() + part.size(), b).ec != std::errc{}) return std::nullopt;
        layout.blocks.push_back(b);
      }
    } else if (key == "n_free") {
      if (std::from_chars(val.data(), val.data() + val.size(), layout.n_free).ec != std::errc{}) return std::nullopt;
    } else if (key == "objective") {
      layout.objective = val == "1";
    }
  }
  return layout;
}

}  // namespace detail

/// Parses SDPA sparse text. Files written by export_sdpa come back as the
/// identical SdpProblem; other files map each LP block entry to a 1x1 block.
inline SdpProblem parse_sdpa(std::string_view text) {
  detail::SdpaReader in(text);
  std::optional<detail::SdpaLayout> layout;
  for (const auto& c : in.leading_comments())
    if (!layout) layout = detail::parse_layout_comment(c);

  auto m_tok = in.require("mdim");
  const long m = detail::SdpaReader::to_long(m_tok, "mdim");
  if (m < 0) throw ParseError("mdim must be non-negative", m_tok.line, m_tok.column);
  in.skip_line();
  auto nb_tok = in.require("nblocks");
  const long nblocks = detail::SdpaReader::to_long(nb_tok, "nblocks");
  if (nblocks < 1) throw ParseError("nblocks must be positive", nb_tok.line, nb_tok.column);
  in.skip_line();
  std::vector<long> structure;
  for (long i = 0; i < nblocks; ++i) {
    auto t = in.require("block size");
    const long s = detail::SdpaReader::to_long(t, "block size");
    if (s == 0) throw ParseError("block size must be nonzero", t.line, t.column);
    structure.push_back(s);
  }
  in.skip_line();
  std::vector<double> c(static_cast<std::size_t>(m));
  for (auto& v : c) v = detail::SdpaReader::to_double(in.require("objective vector entry"), "objective vector entry");

  SdpProblem p;
  // sdpa block (1-based) -> (soslyap block, or LP offset)
  std::vector<long> to_block(structure.size() + 1, -1);
  long lp_block = 0;
  if (layout) {
    p.blocks = layout->blocks;
    p.n_free = layout->n_free;
    long s = 0;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      if (p.blocks[b] == 0) continue;
      ++s;
      if (s > static_cast<long>(structure.size()) || structure[static_cast<std::size_t>(s - 1)] != static_cast<long>(p.blocks[b]))
        throw ParseError("block structure disagrees with the layout comment", nb_tok.line + 1, 1);
      to_block[static_cast<std::size_t>(s)] = static_cast<long>(b);
    }
    if (p.n_free > 0) {
      lp_block = s + 1;
      if (lp_block > static_cast<long>(structure.size()) ||
          structure[static_cast<std::size_t>(lp_block - 1)] != -2 * static_cast<long>(p.n_free))
        throw ParseError("free-variable block disagrees with the layout comment", nb_tok.line + 1, 1);
    }
    if (layout->objective) p.objective = std::vector<double>(p.n_free, 0.0);
  }
  std::vector<std::vector<long>> lp_offset(structure.size() + 1);
  if (!layout) {
    for (std::size_t s = 0; s < structure.size(); ++s) {
      if (structure[s] > 0) {
        to_block[s + 1] = static_cast<long>(p.blocks.size());
        p.blocks.push_back(static_cast<std::size_t>(structure[s]));
      } else {
        for (long k = 0; k < -structure[s]; ++k) {
          lp_offset[s + 1].push_back(static_cast<long>(p.blocks.size()));
          p.blocks.push_back(1);
        }
      }
    }
  }
  p.constraints.resize(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < c.size(); ++i) p.constraints[i].rhs = c[i];

  while (auto first = in.next()) {
    const long mat = detail::SdpaReader::to_long(*first, "matrix number");
    auto bt = in.require("block number");
    auto it = in.require("row index");
    auto jt = in.require("column index");
    auto vt = in.require("value");
    const long blk = detail::SdpaReader::to_long(bt, "block number");
    long r = detail::SdpaReader::to_long(it, "row index");
    long k = detail::SdpaReader::to_long(jt, "column index");
    const double v = detail::SdpaReader::to_double(vt, "value");
    if (mat < 0 || mat > m) throw ParseError("matrix number out of range", first->line, first->column);
    if (blk < 1 || blk > nblocks) throw ParseError("block number out of range", bt.line, bt.column);
    const long size = structure[static_cast<std::size_t>(blk - 1)];
    const long dim = size > 0 ? size : -size;
    if (r < 1 || r > dim) throw ParseError("row index out of range", it.line, it.column);
    if (k < 1 || k > dim) throw ParseError("column index out of range", jt.line, jt.column);
    if (r > k) std::swap(r, k);
    if (size < 0 && r != k) throw ParseError("off-diagonal entry in an LP block", jt.line, jt.column);

    if (layout && blk == lp_block) {
      const auto idx = static_cast<std::size_t>(r - 1);
      if (idx >= p.n_free) continue;  // the u- half mirrors u+
      if (mat == 0) {
        if (!p.objective) throw ParseError("objective entry but the layout comment declares none", first->line, first->column);
        (*p.objective)[idx] = v;
      } else
        p.constraints[static_cast<std::size_t>(mat - 1)].free.push_back({idx, v});
      continue;
    }
    if (mat == 0) continue;  // SDPA primal cost on Gram blocks is not part of the problem
    auto& con = p.constraints[static_cast<std::size_t>(mat - 1)];
    if (size > 0) {
      const long b = to_block[static_cast<std::size_t>(blk)];
      if (b < 0) throw ParseError("entry in a block unknown to the layout comment", bt.line, bt.column);
      con.gram.push_back({static_cast<std::size_t>(b), static_cast<std::size_t>(r - 1), static_cast<std::size_t>(k - 1), v});
    } else {
      const auto& offs = lp_offset[static_cast<std::size_t>(blk)];
      if (offs.empty()) throw ParseError("entry in an unused padding block", bt.line, bt.column);
      con.gram.push_back({static_cast<std::size_t>(offs[static_cast<std::size_t>(r - 1)]), 0, 0, v});
    }
  }
  p.validate();
  return p;
}

}  // namespace soslyap
