#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "soslyap/lyap/certificate.hpp"
#include "soslyap/sdp/solver.hpp"
#include "soslyap/sos/compile.hpp"
#include "soslyap/sos/program.hpp"

namespace soslyap {

struct ProgramOutcome {
  CompiledProgram compiled;
  SdpSolution solution;
  /// Gram data per constraint (matrices filled only when Feasible).
  std::vector<GramCertificate> grams;
};

inline ProgramOutcome solve_program(const std::vector<SosConstraint>& program,
                                    const std::vector<PolynomialTemplate>& templates,
                                    const std::vector<NormalizationRule>& normalization,
                                    const SolverSettings& settings = {}) {
  ProgramOutcome out;
  out.compiled = compile(program, templates, normalization);
  out.solution = solve(out.compiled.problem, settings);
  for (std::size_t b = 0; b < out.compiled.blocks.size(); ++b) {
    const auto& info = out.compiled.blocks[b];
    GramCertificate g;
    g.label = info.label;
    g.basis = info.basis;
    g.shift = info.shift;
    if (out.solution.feasible()) {
      g.gram = out.solution.blocks[b];
      g.min_eigenvalue = min_eigenvalue(g.gram);
    }
    out.grams.push_back(std::move(g));
  }
  return out;
}

namespace detail {

/// Sum of |coefficient| over even monomials, a proxy for the Gram trace.
inline double square_mass(const Polynomial& p) {
  double mass = 0.0;
  for (const auto& [m, c] : p.terms()) {
    bool even = true;
    for (int e : m.exponents()) even = even && e % 2 == 0;
    if (even) mass += std::abs(c);
  }
  return mass;
}

}  // namespace detail

struct SosCheck {
  SdpStatus status = SdpStatus::Indeterminate;
  std::optional<GramCertificate> certificate;
  double margin = 0.0;
  std::size_t gram_size = 0;
  int iterations = 0;
  std::string note;

  bool feasible() const noexcept { return status == SdpStatus::Feasible; }
};

/// Is p a sum of squares? With `eps` > 0 the test is p - eps * shift sos,
/// which also certifies positive definiteness.
inline SosCheck check_sos(const Polynomial& p, bool homogeneous = false, const SolverSettings& settings = {},
                          double eps = 0.0, BasisReduction reduction = BasisReduction::None) {
  SosCheck out;
  if (p.is_zero()) {
    out.status = eps > 0.0 ? SdpStatus::Infeasible : SdpStatus::Feasible;
    if (out.feasible()) out.certificate = GramCertificate{"p", {}, Eigen::MatrixXd(0, 0), Polynomial(p.n_vars()), false, 0.0};
    out.note = "zero polynomial";
    return out;
  }
  if (p.degree() % 2 != 0) {
    out.status = SdpStatus::Infeasible;
    out.note = "odd degree: structurally not a sum of squares";
    return out;
  }
  if (homogeneous && !p.is_homogeneous()) throw DomainError("check_sos: homogeneous test of a non-homogeneous polynomial");
  // Normalized to a fixed coefficient mass: the trace cap never binds and the
  // absolute tolerances see the same scale for every input.
  const double limit = 0.01 * settings.trace_cap;
  const double mass = detail::square_mass(p);
  const double unit = mass > 0.0 ? mass / limit : 1.0;
  std::vector<SosConstraint> program{
      make_sos_constraint("p", AffinePolynomial(unit == 1.0 ? p : (1.0 / unit) * p), homogeneous, reduction)};
  std::vector<NormalizationRule> norm;
  if (eps > 0.0) norm.push_back(EpsilonPD{eps, {0}});
  ProgramOutcome run;
  try {
    run = solve_program(program, {}, norm, settings);
  } catch (const CompileError& e) {
    out.status = SdpStatus::Infeasible;
    out.note = std::string("structurally not a sum of squares: ") + e.what();
    return out;
  }
  out.status = run.solution.status;
  out.margin = unit * run.solution.margin;
  out.iterations = run.solution.iterations;
  out.gram_size = program.front().gram_basis.size();
  out.note = run.solution.note;
  if (out.feasible()) {
    GramCertificate g = run.grams.front();
    g.gram *= unit;
    g.shift *= unit;
    g.min_eigenvalue *= unit;
    if (unit != 1.0) {
      // Residuals grew by `unit`; one least-norm correction in original units.
      SdpProblem original = run.compiled.problem;
      for (auto& c : original.constraints) c.rhs *= unit;
      std::vector<Eigen::MatrixXd> q{g.gram};
      std::vector<double> u;
      detail::polish(original, q, u);
      const double eig = min_eigenvalue(detail::symmetrize(q[0]));
      if (eig >= 0.5 * g.min_eigenvalue &&
          compute_residuals(original, q, u).max_eq_violation < compute_residuals(original, {g.gram}, u).max_eq_violation) {
        g.gram = q[0];
        g.min_eigenvalue = eig;
      }
    }
    out.certificate = std::move(g);
  }
  return out;
}

}  // namespace soslyap
