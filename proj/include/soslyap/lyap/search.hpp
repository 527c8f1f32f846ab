#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "soslyap/error.hpp"
#include "soslyap/lyap/certificate.hpp"
#include "soslyap/lyap/sos_check.hpp"
#include "soslyap/sos/program.hpp"

namespace soslyap {

struct LyapunovOptions {
  /// EpsilonPD scale on every imposed constraint.
  double eps = 1e-4;
  /// Homogeneous template of exactly the search degree. Unset: follow the system.
  std::optional<bool> homogeneous_template;
  /// Impose only the decrease conditions (no condition on V itself).
  bool decrease_only = false;
  BasisReduction reduction = BasisReduction::None;
  SolverSettings solver;
};

struct LyapunovSearch {
  int degree = 0;
  SearchMode mode = SearchMode::VSos;
  SdpStatus status = SdpStatus::Indeterminate;
  std::optional<LyapunovCertificate> certificate;
  double margin = 0.0;
  std::vector<std::size_t> block_sizes;
  std::size_t equality_count = 0;
  int iterations = 0;
  double seconds = 0.0;
  std::string note;

  bool feasible() const noexcept { return status == SdpStatus::Feasible; }
};

namespace detail {

inline void check_search_inputs(const Dynamics& sys, int degree) {
  sys.validate();
  if (degree < 2 || degree % 2 != 0) throw DomainError("Lyapunov degree must be even and at least 2");
  if (sys.time == TimeModel::Continuous)
    for (const auto& f : sys.fields)
      if (!f.vanishes_at_origin()) throw DomainError("the origin is not an equilibrium: f(0) != 0");
}

}  // namespace detail

/// The SOS program of one Lyapunov search before compilation.
struct LyapunovProgram {
  PolynomialTemplate v_template;
  std::vector<SosConstraint> constraints;
  EpsilonPD positivity;

  CompiledProgram compile_program() const { return compile(constraints, {v_template}, {positivity}); }
};

/// V of the given degree with {V sos | t.h.c.(V) sos} and every decrease
/// condition sos, all with EpsilonPD. V has no constant term.
inline LyapunovProgram lyapunov_program(const Dynamics& sys, int degree, SearchMode mode,
                                        const LyapunovOptions& opt = {}) {
  detail::check_search_inputs(sys, degree);
  const std::size_t n = sys.n_vars();
  const bool homogeneous = opt.homogeneous_template.value_or(sys.is_homogeneous());
  LyapunovProgram out;
  out.v_template = PolynomialTemplate::dense(n, degree, homogeneous, 1);
  const AffinePolynomial v = out.v_template.to_affine(0);
  if (!opt.decrease_only) {
    if (mode == SearchMode::VSos)
      out.constraints.push_back(make_sos_constraint("V", v, homogeneous, opt.reduction));
    else
      out.constraints.push_back(make_sos_constraint(
          "thc(V)", v.map([&](const Polynomial& p) { return p.homogeneous_part(degree); }), true, opt.reduction));
  }
  const bool homogeneous_decrease = homogeneous && sys.is_homogeneous();
  for (std::size_t i = 0; i < sys.modes(); ++i)
    out.constraints.push_back(make_sos_constraint(sys.decrease_label(i),
                                                  v.map([&](const Polynomial& p) { return sys.decrease(p, i); }),
                                                  homogeneous_decrease, opt.reduction));
  out.positivity.eps = opt.eps;
  for (std::size_t c = 0; c < out.constraints.size(); ++c) out.positivity.constraints.push_back(c);
  return out;
}

/// One SDP solve of lyapunov_program.
inline LyapunovSearch synthesize_lyapunov(const Dynamics& sys, int degree, SearchMode mode,
                                          const LyapunovOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const LyapunovProgram prog = lyapunov_program(sys, degree, mode, opt);
  const auto& program = prog.constraints;

  LyapunovSearch out;
  out.degree = degree;
  out.mode = mode;
  for (const auto& c : program) out.block_sizes.push_back(c.gram_basis.size());
  ProgramOutcome run;
  try {
    run = solve_program(program, {prog.v_template}, {prog.positivity}, opt.solver);
  } catch (const CompileError& e) {
    out.status = SdpStatus::Infeasible;
    out.note = std::string("structurally infeasible: ") + e.what();
    return out;
  }
  out.equality_count = run.compiled.problem.constraints.size();
  out.status = run.solution.status;
  out.margin = run.solution.margin;
  out.iterations = run.solution.iterations;
  out.note = run.solution.note;
  if (out.feasible()) {
    LyapunovCertificate cert;
    cert.v = run.compiled.template_value(0, run.solution.free);
    cert.mode = mode;
    cert.degree = degree;
    cert.decrease_only = opt.decrease_only;
    cert.grams = run.grams;
    cert.system = sys;
    cert.margin = run.solution.margin;
    out.certificate = std::move(cert);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline LyapunovSearch find_lyapunov(const VectorField& f, int degree, SearchMode mode,
                                    const LyapunovOptions& opt = {}) {
  if (mode == SearchMode::ThcSos && degree < 2) throw DomainError("t.h.c. search needs degree >= 2");
  return synthesize_lyapunov(Dynamics::continuous(f), degree, mode, opt);
}

/// Common V for every mode of a switched system.
inline LyapunovSearch find_common_lyapunov(const Dynamics& sys, int degree, SearchMode mode = SearchMode::VSos,
                                           const LyapunovOptions& opt = {}) {
  if (sys.modes() == 0) throw DimensionError("empty system list");
  if (sys.time == TimeModel::Continuous && sys.modes() > 1) {
    for (const auto& f : sys.fields)
      if (!f.is_homogeneous()) throw DomainError("switched continuous-time modes must be homogeneous");
  }
  return synthesize_lyapunov(sys, degree, mode, opt);
}

inline LyapunovSearch find_common_lyapunov(const std::vector<LinearSystem>& systems, int degree, TimeModel time,
                                           const LyapunovOptions& opt = {}) {
  if (systems.empty()) throw DimensionError("empty system list");
  const Dynamics sys = time == TimeModel::Continuous ? Dynamics::continuous(systems) : Dynamics::discrete(systems);
  return find_common_lyapunov(sys, degree, SearchMode::VSos, opt);
}

/// Degrees 2, 4, ..., degree_max. With `stop_at_first` the sweep ends at the
/// first Feasible degree.
inline std::vector<LyapunovSearch> sweep_degrees(const Dynamics& sys, int degree_max, SearchMode mode,
                                                 const LyapunovOptions& opt = {}, bool stop_at_first = true) {
  std::vector<LyapunovSearch> out;
  for (int d = 2; d <= degree_max; d += 2) {
    out.push_back(synthesize_lyapunov(sys, d, mode, opt));
    if (stop_at_first && out.back().feasible()) break;
  }
  return out;
}

}  // namespace soslyap
