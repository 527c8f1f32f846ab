#pragma once

#include <cstdint>

#include "soslyap/error.hpp"

namespace soslyap {

struct Savings {
  std::int64_t vars_saved = 0;
  std::int64_t eqs_saved = 0;
  friend bool operator==(const Savings&, const Savings&) = default;
};

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline std::int64_t factorial(std::int64_t n) {
  std::int64_t r = 1;
  for (std::int64_t i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Gram-size difference between "V sos" and "t.h.c.(V) sos" for an n-variate
/// V of degree 2d, counted directly from the two monomial bases.
inline Savings count_savings(std::int64_t n_vars, std::int64_t half_degree) {
  if (n_vars < 1 || half_degree < 1) throw DomainError("count_savings needs n_vars >= 1 and half_degree >= 1");
  const std::int64_t n = n_vars, d = half_degree;
  const std::int64_t full = binomial(n + d, d);
  const std::int64_t homog = binomial(n + d - 1, n - 1);
  Savings s;
  s.vars_saved = full * (full + 1) / 2 - homog * (homog + 1) / 2;
  s.eqs_saved = binomial(n + 2 * d, n) - binomial(n + 2 * d - 1, n - 1);
  return s;
}

/// The factorial closed forms:
///   eqs  = 2d (n+2d-1)! / ((2d)! n!)
///   vars = d (n+d-1)! ((2n+d)(n+d-1)! + d! n!) / (2 (d! n!)^2)
/// Exact in 64-bit integers for n + 2d <= 20.
inline Savings count_savings_closed_form(std::int64_t n_vars, std::int64_t half_degree) {
  if (n_vars < 1 || half_degree < 1) throw DomainError("count_savings needs n_vars >= 1 and half_degree >= 1");
  const std::int64_t n = n_vars, d = half_degree;
  if (n + 2 * d > 20) throw DomainError("closed-form savings overflow 64-bit integers");
  Savings s;
  {
    const std::int64_t num = 2 * d * factorial(n + 2 * d - 1);
    const std::int64_t den = factorial(2 * d) * factorial(n);
    if (num % den != 0) throw DomainError("closed-form equality savings is not an integer");
    s.eqs_saved = num / den;
  }
  {
    const std::int64_t a = factorial(n + d - 1);
    const std::int64_t dn = factorial(d) * factorial(n);
    // Divide in stages to stay inside 64 bits.
    const std::int64_t inner = (2 * n + d) * a + dn;
    const std::int64_t den = 2 * dn * dn;
    const __int128 num = static_cast<__int128>(d) * a * inner;
    if (num % den != 0) throw DomainError("closed-form variable savings is not an integer");
    s.vars_saved = static_cast<std::int64_t>(num / den);
  }
  return s;
}

}  // namespace soslyap
