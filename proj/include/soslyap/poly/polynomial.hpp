#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "soslyap/error.hpp"
#include "soslyap/poly/monomial.hpp"

namespace soslyap {

/// Coefficients at or below this magnitude are dropped after arithmetic.
inline constexpr double kPruneThreshold = 1e-12;

/// Sparse multivariate polynomial with double coefficients over x1..xn.
///
/// Terms are kept in GradedOrder, so iteration (and printing) runs from the
/// highest-degree term down to the constant. Values are immutable from the
/// outside apart from the in-place compound operators.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedOrder>;

  Polynomial() : n_vars_(1) {}
  explicit Polynomial(std::size_t n_vars) : n_vars_(n_vars) {
    if (n_vars == 0) throw DimensionError("polynomial needs at least one variable");
  }

  static Polynomial constant(std::size_t n_vars, double c) {
    Polynomial p(n_vars);
    p.add_term(Monomial(n_vars), c);
    return p;
  }

  static Polynomial variable(std::size_t n_vars, std::size_t index) {
    Polynomial p(n_vars);
    p.add_term(Monomial::variable(n_vars, index), 1.0);
    return p;
  }

  static Polynomial monomial(const Monomial& m, double c = 1.0) {
    Polynomial p(m.n_vars());
    p.add_term(m, c);
    return p;
  }

  std::size_t n_vars() const noexcept { return n_vars_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Highest total degree; 0 for the zero polynomial.
  int degree() const noexcept { return terms_.empty() ? 0 : terms_.begin()->first.degree(); }

  /// Lowest total degree among stored terms; 0 for the zero polynomial.
  int min_degree() const noexcept { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

  bool is_homogeneous() const noexcept { return degree() == min_degree(); }

  double coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  double constant_term() const { return coefficient(Monomial(n_vars_)); }

  /// Adds c*m; prunes the term if the result falls under the threshold.
  void add_term(const Monomial& m, double c) {
    if (m.n_vars() != n_vars_) throw DimensionError("monomial and polynomial variable counts differ");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) <= kPruneThreshold) terms_.erase(it);
  }

  double evaluate(std::span<const double> x) const {
    if (x.size() != n_vars_) throw DimensionError("evaluation point has wrong dimension");
    double v = 0.0;
    for (const auto& [m, c] : terms_) v += c * m.evaluate(x);
    return v;
  }

  Polynomial& operator+=(const Polynomial& q) {
    check_same_space(q);
    for (const auto& [m, c] : q.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& q) {
    check_same_space(q);
    for (const auto& [m, c] : q.terms_) add_term(m, -c);
    return *this;
  }

  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (std::abs(it->second) <= kPruneThreshold)
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }
  friend Polynomial operator*(Polynomial p, double s) { return p *= s; }
  friend Polynomial operator*(double s, Polynomial p) { return p *= s; }
  friend Polynomial operator-(Polynomial p) { return p *= -1.0; }

  friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    p.check_same_space(q);
    // Accumulate unpruned, then prune once, so cancellation is exact in the
    // sense of a single summation per output monomial.
    TermMap acc;
    for (const auto& [mp, cp] : p.terms_)
      for (const auto& [mq, cq] : q.terms_) acc[mp * mq] += cp * cq;
    Polynomial r(p.n_vars_);
    for (auto& [m, c] : acc)
      if (std::abs(c) > kPruneThreshold) r.terms_.emplace_hint(r.terms_.end(), m, c);
    return r;
  }

  Polynomial& operator*=(const Polynomial& q) { return *this = *this * q; }

  /// Integer power by repeated squaring; pow(p, 0) == 1.
  friend Polynomial pow(const Polynomial& p, unsigned e) {
    Polynomial result = constant(p.n_vars_, 1.0);
    Polynomial base = p;
    while (e > 0) {
      if (e & 1u) result = result * base;
      e >>= 1u;
      if (e > 0) base = base * base;
    }
    return result;
  }

  /// Exact coefficient-wise equality.
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.n_vars_ == b.n_vars_ && a.terms_ == b.terms_;
  }

  /// Largest absolute coefficient deviation between two polynomials.
  friend double max_abs_difference(const Polynomial& a, const Polynomial& b) {
    a.check_same_space(b);
    double worst = 0.0;
    for (const auto& [m, c] : a.terms_) worst = std::max(worst, std::abs(c - b.coefficient(m)));
    for (const auto& [m, c] : b.terms_)
      if (!a.terms_.contains(m)) worst = std::max(worst, std::abs(c));
    return worst;
  }

  double max_abs_coefficient() const noexcept {
    double worst = 0.0;
    for (const auto& [m, c] : terms_) worst = std::max(worst, std::abs(c));
    return worst;
  }

  /// Sum of the terms whose total degree equals `d`.
  Polynomial homogeneous_part(int d) const {
    Polynomial r(n_vars_);
    for (const auto& [m, c] : terms_)
      if (m.degree() == d) r.terms_.emplace_hint(r.terms_.end(), m, c);
    return r;
  }

 private:
  void check_same_space(const Polynomial& q) const {
    if (q.n_vars_ != n_vars_) throw DimensionError("polynomials over different variable counts");
  }

  std::size_t n_vars_;
  TermMap terms_;
};

}  // namespace soslyap
