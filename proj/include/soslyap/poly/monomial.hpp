#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "soslyap/error.hpp"

namespace soslyap {

/// Exponent vector over a fixed number of positional variables x1..xn.
class Monomial {
 public:
  Monomial() = default;

  /// The constant monomial 1 in `n_vars` variables.
  explicit Monomial(std::size_t n_vars) : exps_(n_vars, 0) {}

  explicit Monomial(std::vector<int> exps) : exps_(std::move(exps)) {
    for (int e : exps_) {
      if (e < 0) throw DomainError("monomial exponents must be non-negative");
      degree_ += e;
    }
  }

  Monomial(std::initializer_list<int> exps) : Monomial(std::vector<int>(exps)) {}

  static Monomial variable(std::size_t n_vars, std::size_t index, int power = 1) {
    std::vector<int> e(n_vars, 0);
    e.at(index) = power;
    return Monomial(std::move(e));
  }

  std::size_t n_vars() const noexcept { return exps_.size(); }
  int degree() const noexcept { return degree_; }
  int operator[](std::size_t i) const { return exps_[i]; }
  std::span<const int> exponents() const noexcept { return exps_; }
  bool is_constant() const noexcept { return degree_ == 0; }

  Monomial operator*(const Monomial& other) const {
    check_same_space(other);
    std::vector<int> e(exps_);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exps_[i];
    return Monomial(std::move(e));
  }

  bool divides(const Monomial& other) const {
    check_same_space(other);
    for (std::size_t i = 0; i < exps_.size(); ++i)
      if (exps_[i] > other.exps_[i]) return false;
    return true;
  }

  /// other / this; requires divides(other).
  Monomial quotient_of(const Monomial& other) const {
    if (!divides(other)) throw DomainError("monomial does not divide");
    std::vector<int> e(other.exps_);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= exps_[i];
    return Monomial(std::move(e));
  }

  /// Appends one variable carrying `exponent`.
  Monomial with_extra_variable(int exponent) const {
    std::vector<int> e(exps_);
    e.push_back(exponent);
    return Monomial(std::move(e));
  }

  Monomial without_last_variable() const {
    if (exps_.empty()) throw DimensionError("monomial has no variables");
    std::vector<int> e(exps_.begin(), exps_.end() - 1);
    return Monomial(std::move(e));
  }

  double evaluate(std::span<const double> x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < exps_.size(); ++i)
      for (int k = 0; k < exps_[i]; ++k) v *= x[i];
    return v;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.exps_ == b.exps_; }

 private:
  void check_same_space(const Monomial& other) const {
    if (other.exps_.size() != exps_.size())
      throw DimensionError("monomials over different variable counts");
  }

  std::vector<int> exps_;
  int degree_ = 0;
};

/// Graded order used for storage and printing: higher total degree first,
/// ties broken lexicographically with x1 most significant (x1^2 before x1*x2).
struct GradedOrder {
  bool operator()(const Monomial& a, const Monomial& b) const {
    if (a.degree() != b.degree()) return a.degree() > b.degree();
    auto ea = a.exponents();
    auto eb = b.exponents();
    return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end(),
                                        std::greater<int>{});
  }
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int e : m.exponents()) h = (h ^ static_cast<std::size_t>(e)) * 1099511628211ull;
    return h;
  }
};

/// All monomials in `n_vars` variables with lo <= degree <= hi, ascending in
/// degree and x1-heaviest first within each degree.
inline std::vector<Monomial> monomials_in_degree_range(std::size_t n_vars, int lo, int hi) {
  std::vector<Monomial> out;
  if (n_vars == 0) throw DimensionError("monomial enumeration needs at least one variable");
  lo = std::max(lo, 0);
  std::vector<int> e(n_vars, 0);
  // Recursive fill of the exponent vector, largest leading exponent first.
  std::function<void(std::size_t, int)> fill = [&](std::size_t pos, int remaining) {
    if (pos + 1 == n_vars) {
      e[pos] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[pos] = k;
      fill(pos + 1, remaining - k);
    }
  };
  for (int d = lo; d <= hi; ++d) fill(0, d);
  return out;
}

}  // namespace soslyap
