#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "soslyap/error.hpp"
#include "soslyap/poly/polynomial.hpp"

namespace soslyap {

/// Coefficient of one monomial as an affine function of decision variables.
struct LinearForm {
  double constant = 0.0;
  std::map<std::size_t, double> coeffs;
  bool is_constant() const { return coeffs.empty(); }
};

/// Polynomial whose coefficients are affine in decision variables:
/// constant + sum_j c_j * weight_j.
class AffinePolynomial {
 public:
  AffinePolynomial() = default;
  explicit AffinePolynomial(std::size_t n_vars) : constant_(n_vars) {}
  explicit AffinePolynomial(Polynomial constant) : constant_(std::move(constant)) {}

  std::size_t n_vars() const noexcept { return constant_.n_vars(); }
  const Polynomial& constant() const noexcept { return constant_; }
  const std::vector<std::pair<std::size_t, Polynomial>>& terms() const noexcept { return terms_; }

  /// Adds c_var * weight.
  void add_variable_term(std::size_t var, Polynomial weight) {
    if (weight.n_vars() != n_vars()) throw DimensionError("affine term weight has wrong variable count");
    if (weight.is_zero()) return;
    terms_.emplace_back(var, std::move(weight));
  }

  AffinePolynomial& operator+=(const AffinePolynomial& o) {
    constant_ += o.constant_;
    for (const auto& t : o.terms_) terms_.push_back(t);
    return *this;
  }

  AffinePolynomial& operator-=(const Polynomial& p) {
    constant_ -= p;
    return *this;
  }

  AffinePolynomial& operator*=(double s) {
    constant_ *= s;
    for (auto& [v, w] : terms_) w *= s;
    return *this;
  }

  /// Applies a linear map on polynomials to every part (d/dt, composition, ...).
  AffinePolynomial map(const std::function<Polynomial(const Polynomial&)>& op) const {
    Polynomial c = op(constant_);
    AffinePolynomial out(c.n_vars());
    out.constant_ = std::move(c);
    for (const auto& [v, w] : terms_) out.add_variable_term(v, op(w));
    return out;
  }

  /// Per-monomial affine coefficients, merged over repeated variables.
  std::map<Monomial, LinearForm, GradedOrder> collect() const {
    std::map<Monomial, LinearForm, GradedOrder> out;
    for (const auto& [m, c] : constant_.terms()) out[m].constant += c;
    for (const auto& [v, w] : terms_)
      for (const auto& [m, c] : w.terms()) out[m].coeffs[v] += c;
    return out;
  }

  /// Monomials that can carry a nonzero coefficient for some assignment.
  std::vector<Monomial> support() const {
    std::vector<Monomial> out;
    for (const auto& [m, f] : collect()) out.push_back(m);
    return out;
  }

  Polynomial evaluate(std::span<const double> values) const {
    Polynomial out = constant_;
    for (const auto& [v, w] : terms_) {
      if (v >= values.size()) throw DimensionError("affine polynomial references an unassigned variable");
      out += w * values[v];
    }
    return out;
  }

 private:
  Polynomial constant_;
  std::vector<std::pair<std::size_t, Polynomial>> terms_;
};

}  // namespace soslyap
