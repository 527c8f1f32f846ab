#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "soslyap/error.hpp"
#include "soslyap/poly/polynomial.hpp"

namespace soslyap {

/// Continuous-time polynomial dynamics x' = f(x), one component per state.
class VectorField {
 public:
  VectorField() = default;

  explicit VectorField(std::vector<Polynomial> components) : components_(std::move(components)) {
    if (components_.empty()) throw DimensionError("vector field needs at least one component");
    for (const auto& c : components_)
      if (c.n_vars() != components_.size())
        throw DimensionError("vector field component has " + std::to_string(c.n_vars()) +
                             " variables, expected " + std::to_string(components_.size()));
  }

  std::size_t n_vars() const noexcept { return components_.size(); }
  const std::vector<Polynomial>& components() const noexcept { return components_; }
  const Polynomial& operator[](std::size_t i) const { return components_[i]; }

  int degree() const noexcept {
    int d = 0;
    for (const auto& c : components_) d = std::max(d, c.degree());
    return d;
  }

  /// Lowest total degree over all nonzero components (0 if all are zero).
  int min_degree() const noexcept {
    int d = -1;
    for (const auto& c : components_)
      if (!c.is_zero()) d = d < 0 ? c.min_degree() : std::min(d, c.min_degree());
    return d < 0 ? 0 : d;
  }

  /// True iff every component is a form and all share one degree.
  bool is_homogeneous() const noexcept {
    int d = -1;
    for (const auto& c : components_) {
      if (c.is_zero()) continue;
      if (!c.is_homogeneous()) return false;
      if (d >= 0 && c.degree() != d) return false;
      d = c.degree();
    }
    return true;
  }

  bool vanishes_at_origin() const {
    for (const auto& c : components_)
      if (c.constant_term() != 0.0) return false;
    return true;
  }

  std::vector<double> evaluate(std::span<const double> x) const {
    std::vector<double> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.evaluate(x));
    return out;
  }

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  std::vector<Polynomial> components_;
};

/// Linear dynamics x' = A x (continuous time) or x+ = A x (discrete time).
class LinearSystem {
 public:
  LinearSystem() = default;
  explicit LinearSystem(Eigen::MatrixXd a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols() || a_.rows() == 0)
      throw DimensionError("linear system matrix must be square and nonempty");
  }

  std::size_t n_vars() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }

  /// Components (A x)_i as degree-1 forms.
  VectorField as_vector_field() const {
    std::vector<Polynomial> comps;
    const std::size_t n = n_vars();
    for (std::size_t i = 0; i < n; ++i) {
      Polynomial row(n);
      for (std::size_t j = 0; j < n; ++j)
        row.add_term(Monomial::variable(n, j), a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      comps.push_back(std::move(row));
    }
    return VectorField(std::move(comps));
  }

 private:
  Eigen::MatrixXd a_;
};

}  // namespace soslyap
