#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "soslyap/error.hpp"
#include "soslyap/poly/polynomial.hpp"
#include "soslyap/poly/vector_field.hpp"

namespace soslyap {

inline Polynomial partial_derivative(const Polynomial& p, std::size_t var) {
  if (var >= p.n_vars()) throw DimensionError("differentiation variable out of range");
  Polynomial d(p.n_vars());
  for (const auto& [m, c] : p.terms()) {
    const int e = m[var];
    if (e == 0) continue;
    std::vector<int> exps(m.exponents().begin(), m.exponents().end());
    exps[var] -= 1;
    d.add_term(Monomial(std::move(exps)), c * e);
  }
  return d;
}

inline std::vector<Polynomial> gradient(const Polynomial& p) {
  std::vector<Polynomial> g;
  g.reserve(p.n_vars());
  for (std::size_t i = 0; i < p.n_vars(); ++i) g.push_back(partial_derivative(p, i));
  return g;
}

/// <grad V, f>: the time derivative of V along x' = f(x).
inline Polynomial lie_derivative(const Polynomial& v, const VectorField& f) {
  if (v.n_vars() != f.n_vars())
    throw DimensionError("Lie derivative: V has " + std::to_string(v.n_vars()) +
                         " variables, field has " + std::to_string(f.n_vars()));
  Polynomial out(v.n_vars());
  for (std::size_t i = 0; i < v.n_vars(); ++i) {
    Polynomial di = partial_derivative(v, i);
    if (di.is_zero() || f[i].is_zero()) continue;
    out += di * f[i];
  }
  return out;
}

/// p(A x) for a square matrix A.
inline Polynomial compose_linear(const Polynomial& p, const Eigen::MatrixXd& a) {
  const std::size_t n = p.n_vars();
  if (static_cast<std::size_t>(a.rows()) != n || static_cast<std::size_t>(a.cols()) != n)
    throw DimensionError("linear substitution matrix does not match polynomial dimension");
  std::vector<Polynomial> rows;
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial r(n);
    for (std::size_t j = 0; j < n; ++j)
      r.add_term(Monomial::variable(n, j), a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    rows.push_back(std::move(r));
  }
  // powers[i][e] = (A x)_i^e, built lazily.
  std::vector<std::vector<Polynomial>> powers(n);
  auto power = [&](std::size_t i, int e) -> const Polynomial& {
    auto& cache = powers[i];
    if (cache.empty()) cache.push_back(Polynomial::constant(n, 1.0));
    while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * rows[i]);
    return cache[static_cast<std::size_t>(e)];
  };
  Polynomial out(n);
  for (const auto& [m, c] : p.terms()) {
    Polynomial term = Polynomial::constant(n, c);
    for (std::size_t i = 0; i < n; ++i)
      if (m[i] > 0) term = term * power(i, m[i]);
    out += term;
  }
  return out;
}

/// V(x) - V(A x): the one-step decrease of V along x+ = A x.
inline Polynomial discrete_difference(const Polynomial& v, const LinearSystem& sys) {
  if (v.n_vars() != sys.n_vars()) throw DimensionError("discrete difference: dimension mismatch");
  return v - compose_linear(v, sys.matrix());
}

/// y^target_degree * p(x / y) as a form in n+1 variables, y appended last.
inline Polynomial homogenize(const Polynomial& p, int target_degree) {
  if (target_degree < p.degree())
    throw DomainError("homogenization degree " + std::to_string(target_degree) +
                      " is below the polynomial degree " + std::to_string(p.degree()));
  Polynomial out(p.n_vars() + 1);
  for (const auto& [m, c] : p.terms()) out.add_term(m.with_extra_variable(target_degree - m.degree()), c);
  return out;
}

/// Sets the last variable to 1 and drops it: the inverse of homogenize.
inline Polynomial dehomogenize(const Polynomial& p) {
  if (p.n_vars() < 2) throw DimensionError("dehomogenize needs at least two variables");
  Polynomial out(p.n_vars() - 1);
  for (const auto& [m, c] : p.terms()) out.add_term(m.without_last_variable(), c);
  return out;
}

/// The form collecting the highest-degree terms of p.
inline Polynomial top_homogeneous_component(const Polynomial& p) {
  if (p.is_zero()) throw DomainError("top homogeneous component of the zero polynomial");
  return p.homogeneous_part(p.degree());
}

/// p - (1/d) * sum_i x_i dp/dx_i, identically zero for a form of degree d.
inline Polynomial euler_residual(const Polynomial& p) {
  if (p.is_zero() || !p.is_homogeneous() || p.degree() < 1)
    throw DomainError("Euler residual needs a nonzero form of degree >= 1");
  const std::size_t n = p.n_vars();
  Polynomial radial(n);
  for (std::size_t i = 0; i < n; ++i) radial += Polynomial::variable(n, i) * partial_derivative(p, i);
  return p - radial * (1.0 / p.degree());
}

/// (x1^2 + ... + xn^2)^k.
inline Polynomial squared_norm_power(std::size_t n_vars, int k) {
  Polynomial s(n_vars);
  for (std::size_t i = 0; i < n_vars; ++i) s.add_term(Monomial::variable(n_vars, i, 2), 1.0);
  return pow(s, static_cast<unsigned>(k));
}

/// ||grad p||^2.
inline Polynomial gradient_norm_squared(const Polynomial& p) {
  Polynomial out(p.n_vars());
  for (const auto& g : gradient(p)) out += g * g;
  return out;
}

}  // namespace soslyap
