#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "soslyap/error.hpp"
#include "soslyap/poly/text.hpp"
#include "soslyap/sos/program.hpp"
#include "soslyap/sos/sdp_problem.hpp"

namespace soslyap {

class CompileError : public Error {
 public:
  using Error::Error;
};

/// Per-block bookkeeping needed to turn a solver point back into polynomials.
struct GramBlockInfo {
  std::string label;
  std::vector<Monomial> basis;
  /// eps * shift subtracted from the target by EpsilonPD (zero if none).
  Polynomial shift;
  /// The target with decision variables still symbolic (before the shift).
  AffinePolynomial target;
};

struct CompiledProgram {
  SdpProblem problem;
  std::vector<GramBlockInfo> blocks;
  std::vector<PolynomialTemplate> templates;
  std::vector<std::size_t> template_offsets;
  /// Monomial matched by each equality row (empty for normalization rows).
  std::vector<std::optional<Monomial>> row_monomials;

  Polynomial template_value(std::size_t t, std::span<const double> free_values) const {
    const auto& tp = templates.at(t);
    return tp.instantiate(free_values.subspan(template_offsets.at(t), tp.size()));
  }
};

/// z^T Q z for basis z.
inline Polynomial gram_polynomial(std::size_t n_vars, const std::vector<Monomial>& basis, const Eigen::MatrixXd& q) {
  if (static_cast<std::size_t>(q.rows()) != basis.size() || q.rows() != q.cols())
    throw DimensionError("Gram matrix does not match its basis");
  Polynomial p(n_vars);
  std::map<Monomial, double, GradedOrder> acc;
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = 0; b < basis.size(); ++b)
      acc[basis[a] * basis[b]] += q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  for (const auto& [m, c] : acc) p.add_term(m, c);
  return p;
}

/// Gram-matrix compilation: one PSD block per constraint, one equality per
/// distinct monomial of z z^T or of the target, normalization rows appended.
inline CompiledProgram compile(const std::vector<SosConstraint>& program, const std::vector<PolynomialTemplate>& templates,
                               const std::vector<NormalizationRule>& normalization = {}) {
  if (program.empty()) throw CompileError("empty SOS program");
  CompiledProgram out;
  out.templates = templates;
  std::size_t n_free = 0;
  for (const auto& t : templates) {
    out.template_offsets.push_back(n_free);
    n_free += t.size();
  }
  out.problem.n_free = n_free;

  std::vector<Polynomial> shifts;
  for (const auto& c : program) shifts.emplace_back(c.target.n_vars());
  for (const auto& rule : normalization) {
    if (const auto* e = std::get_if<EpsilonPD>(&rule)) {
      for (auto idx : e->constraints) {
        if (idx >= program.size()) throw CompileError("EpsilonPD references a missing constraint");
        shifts[idx] = positivity_shift(program[idx].target.n_vars(), program[idx].gram_basis) * e->eps;
      }
    }
  }

  for (std::size_t b = 0; b < program.size(); ++b) {
    const auto& con = program[b];
    const std::size_t n = con.target.n_vars();
    for (const auto& z : con.gram_basis)
      if (z.n_vars() != n) throw DimensionError("constraint '" + con.label + "': Gram basis has wrong variable count");
    for (const auto& [v, w] : con.target.terms())
      if (v >= n_free) throw CompileError("constraint '" + con.label + "' references an undeclared template coefficient");

    // Pairs (a <= c) grouped by product monomial.
    std::map<Monomial, std::vector<std::pair<std::size_t, std::size_t>>, GradedOrder> pairs;
    for (std::size_t a = 0; a < con.gram_basis.size(); ++a)
      for (std::size_t c = a; c < con.gram_basis.size(); ++c)
        pairs[con.gram_basis[a] * con.gram_basis[c]].emplace_back(a, c);

    AffinePolynomial shifted = con.target;
    shifted -= shifts[b];
    auto coeffs = shifted.collect();

    std::map<Monomial, int, GradedOrder> rows;
    for (const auto& [m, _] : pairs) rows[m];
    for (const auto& [m, f] : coeffs) {
      if (!pairs.contains(m) && f.is_constant())
        throw CompileError("constraint '" + con.label + "': monomial " + to_string(Polynomial::monomial(m)) +
                           " of the target lies outside the span of the Gram basis");
      rows[m];
    }

    out.problem.blocks.push_back(con.gram_basis.size());
    // Ascending degree keeps row order aligned with the basis enumeration.
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      const Monomial& m = it->first;
      EqualityConstraint eq;
      if (auto p = pairs.find(m); p != pairs.end())
        for (auto [a, c] : p->second) eq.gram.push_back({b, a, c, 1.0});
      if (auto f = coeffs.find(m); f != coeffs.end()) {
        for (const auto& [v, w] : f->second.coeffs)
          if (w != 0.0) eq.free.push_back({v, -w});
        eq.rhs = f->second.constant;
      }
      out.problem.constraints.push_back(std::move(eq));
      out.row_monomials.push_back(m);
    }
    out.blocks.push_back(GramBlockInfo{con.label, con.gram_basis, shifts[b], con.target});
  }

  for (const auto& rule : normalization) {
    if (const auto* u = std::get_if<UnitLeading>(&rule)) {
      if (u->template_index >= templates.size()) throw CompileError("UnitLeading references a missing template");
      const auto& basis = templates[u->template_index].basis();
      auto it = std::find(basis.begin(), basis.end(), u->monomial);
      if (it == basis.end()) throw CompileError("UnitLeading monomial is not a free template coefficient");
      EqualityConstraint eq;
      eq.free.push_back({out.template_offsets[u->template_index] + static_cast<std::size_t>(it - basis.begin()), 1.0});
      eq.rhs = u->value;
      out.problem.constraints.push_back(std::move(eq));
      out.row_monomials.emplace_back(std::nullopt);
    } else if (const auto* t = std::get_if<TraceOne>(&rule)) {
      if (t->block >= out.problem.blocks.size()) throw CompileError("TraceOne references a missing block");
      EqualityConstraint eq;
      for (std::size_t a = 0; a < out.problem.blocks[t->block]; ++a) eq.gram.push_back({t->block, a, a, 1.0});
      eq.rhs = 1.0;
      out.problem.constraints.push_back(std::move(eq));
      out.row_monomials.emplace_back(std::nullopt);
    }
  }
  out.problem.validate();
  return out;
}

}  // namespace soslyap
