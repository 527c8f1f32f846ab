#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "soslyap/error.hpp"
#include "soslyap/poly/calculus.hpp"
#include "soslyap/poly/polynomial.hpp"
#include "soslyap/sos/affine.hpp"

namespace soslyap {

/// Gram basis: all monomials of degree <= half_degree, or exactly
/// half_degree when `homogeneous`. Count C(n+d, d) resp. C(n+d-1, n-1).
inline std::vector<Monomial> monomial_basis(std::size_t n_vars, int half_degree, bool homogeneous) {
  if (n_vars < 1) throw DimensionError("monomial basis needs n_vars >= 1");
  if (half_degree < 0) throw DomainError("monomial basis needs half_degree >= 0");
  return monomials_in_degree_range(n_vars, homogeneous ? half_degree : 0, half_degree);
}

/// Unknown polynomial sum_j c_j * basis_j + sum pinned.
class PolynomialTemplate {
 public:
  PolynomialTemplate() = default;

  PolynomialTemplate(std::size_t n_vars, std::vector<Monomial> basis, std::map<Monomial, double, GradedOrder> pinned = {})
      : n_vars_(n_vars), basis_(std::move(basis)), pinned_(std::move(pinned)) {
    std::set<Monomial, GradedOrder> seen;
    for (const auto& m : basis_) {
      if (m.n_vars() != n_vars_) throw DimensionError("template monomial has wrong variable count");
      if (!seen.insert(m).second) throw DomainError("template basis monomials must be distinct");
      degree_ = std::max(degree_, m.degree());
    }
    for (const auto& [m, c] : pinned_) {
      if (m.n_vars() != n_vars_) throw DimensionError("pinned monomial has wrong variable count");
      if (seen.contains(m)) throw DomainError("pinned monomials must be disjoint from the free basis");
      degree_ = std::max(degree_, m.degree());
    }
  }

  /// All monomials with min_degree <= deg <= degree (exactly `degree` when
  /// homogeneous). min_degree = 1 leaves out the constant term.
  static PolynomialTemplate dense(std::size_t n_vars, int degree, bool homogeneous, int min_degree = 0) {
    return PolynomialTemplate(n_vars, monomials_in_degree_range(n_vars, homogeneous ? degree : min_degree, degree));
  }

  std::size_t n_vars() const noexcept { return n_vars_; }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return basis_.size(); }
  const std::vector<Monomial>& basis() const noexcept { return basis_; }
  const std::map<Monomial, double, GradedOrder>& pinned() const noexcept { return pinned_; }
  bool has_constant_term() const {
    Monomial one(n_vars_);
    return std::find(basis_.begin(), basis_.end(), one) != basis_.end() || pinned_.contains(one);
  }

  /// Affine expression with free coefficients numbered from `offset`.
  AffinePolynomial to_affine(std::size_t offset) const {
    Polynomial fixed(n_vars_);
    for (const auto& [m, c] : pinned_) fixed.add_term(m, c);
    AffinePolynomial a(std::move(fixed));
    for (std::size_t j = 0; j < basis_.size(); ++j) a.add_variable_term(offset + j, Polynomial::monomial(basis_[j]));
    return a;
  }

  Polynomial instantiate(std::span<const double> coeffs) const {
    if (coeffs.size() != basis_.size()) throw DimensionError("template coefficient count mismatch");
    Polynomial p(n_vars_);
    for (const auto& [m, c] : pinned_) p.add_term(m, c);
    for (std::size_t j = 0; j < basis_.size(); ++j) p.add_term(basis_[j], coeffs[j]);
    return p;
  }

 private:
  std::size_t n_vars_ = 1;
  std::vector<Monomial> basis_;
  std::map<Monomial, double, GradedOrder> pinned_;
  int degree_ = 0;
};

enum class BasisReduction {
  None,
  /// Iteratively drops z_a when z_a^2 cannot appear in the target and is not
  /// produced by any other pair of basis elements (forced zero diagonal).
  DiagonalConsistency,
};

/// Gram basis for a target whose coefficients range over `support`.
/// Homogeneous: degree exactly deg/2. Otherwise all degrees in
/// [ceil(lo/2), floor(hi/2)] where lo..hi is the degree range of the support.
inline std::vector<Monomial> gram_basis_for(std::size_t n_vars, const std::vector<Monomial>& support, bool homogeneous,
                                            BasisReduction reduction = BasisReduction::None) {
  if (support.empty()) return {};
  int lo = support.front().degree(), hi = lo;
  for (const auto& m : support) {
    lo = std::min(lo, m.degree());
    hi = std::max(hi, m.degree());
  }
  std::vector<Monomial> basis;
  if (homogeneous) {
    if (lo != hi) throw DomainError("homogeneous Gram basis requested for a non-homogeneous target");
    if (hi % 2 != 0) return {};
    basis = monomial_basis(n_vars, hi / 2, true);
  } else {
    basis = monomials_in_degree_range(n_vars, (lo + 1) / 2, hi / 2);
  }
  if (reduction == BasisReduction::DiagonalConsistency) {
    std::set<Monomial, GradedOrder> supp(support.begin(), support.end());
    bool changed = true;
    while (changed) {
      changed = false;
      std::map<Monomial, int, GradedOrder> offdiag;
      for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = a + 1; b < basis.size(); ++b) offdiag[basis[a] * basis[b]]++;
      std::vector<Monomial> kept;
      for (const auto& z : basis) {
        const Monomial sq = z * z;
        if (supp.contains(sq) || offdiag.contains(sq))
          kept.push_back(z);
        else
          changed = true;
      }
      basis = std::move(kept);
    }
  }
  return basis;
}

/// target(c) must be a sum of squares over `gram_basis`.
struct SosConstraint {
  std::string label;
  AffinePolynomial target;
  std::vector<Monomial> gram_basis;
};

/// Builds a constraint with the basis chosen by gram_basis_for.
inline SosConstraint make_sos_constraint(std::string label, AffinePolynomial target, bool homogeneous,
                                         BasisReduction reduction = BasisReduction::None) {
  auto basis = gram_basis_for(target.n_vars(), target.support(), homogeneous, reduction);
  return SosConstraint{std::move(label), std::move(target), std::move(basis)};
}

/// Fix one template coefficient (default to 1).
struct UnitLeading {
  std::size_t template_index = 0;
  Monomial monomial;
  double value = 1.0;
};

/// target_i - eps * shift_i must be sos for each listed constraint, where
/// shift_i = (sum x^2)^{lo} and lo is the smallest degree in the Gram basis.
/// Since target_i >= eps * |x|^{2 lo}, this certifies positive definiteness
/// whenever lo >= 1.
struct EpsilonPD {
  double eps = 1e-4;
  std::vector<std::size_t> constraints;
};

/// Trace of one Gram block equals 1.
struct TraceOne {
  std::size_t block = 0;
};

using NormalizationRule = std::variant<UnitLeading, EpsilonPD, TraceOne>;

/// The strictly positive polynomial subtracted by EpsilonPD for this basis.
inline Polynomial positivity_shift(std::size_t n_vars, const std::vector<Monomial>& basis) {
  Polynomial shift(n_vars);
  if (basis.empty()) return shift;
  int lo = basis.front().degree(), hi = lo;
  for (const auto& z : basis) {
    lo = std::min(lo, z.degree());
    hi = std::max(hi, z.degree());
  }
  const bool full_range = monomials_in_degree_range(n_vars, lo, hi).size() == basis.size();
  if (!full_range) {
    // Reduced bases: z^T I z keeps the shift inside the Gram support.
    for (const auto& z : basis) shift.add_term(z * z, 1.0);
    return shift;
  }
  return squared_norm_power(n_vars, lo);
}

}  // namespace soslyap
