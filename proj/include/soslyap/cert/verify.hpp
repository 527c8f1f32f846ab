#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "soslyap/cert/sampling.hpp"
#include "soslyap/error.hpp"
#include "soslyap/lyap/certificate.hpp"
#include "soslyap/sdp/linalg.hpp"
#include "soslyap/sos/sdpa.hpp"

namespace soslyap {

/// Verification tolerances. Solver tolerances sit at eq_tol = 1e-7 and
/// psd_tol = 1e-8; reconstruction is checked at 1e-6 absolute, eigenvalues at
/// -1e-8 * trace, identities at 1e-10 relative and samples at -1e-9.
struct VerifyTolerances {
  double reconstruction = 1e-6;
  double eigenvalue = 1e-8;
  double identity = 1e-10;
  double sample = 1e-9;
};

struct ConstraintCheck {
  std::string label;
  double reconstruction_error = 0.0;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  bool passed = false;
};

struct IdentityCheck {
  std::string name;
  double relative_error = 0.0;
  bool holds = false;
};

struct SampleCheck {
  std::string name;
  double min_value = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  bool passed = false;
};

enum class Verdict { Verified, Rejected };

inline std::string to_string(Verdict v) { return v == Verdict::Verified ? "verified" : "rejected"; }

struct VerificationReport {
  std::vector<ConstraintCheck> constraints;
  std::vector<IdentityCheck> identities;
  std::vector<SampleCheck> samples;
  Verdict verdict = Verdict::Rejected;
  std::vector<std::string> reasons;
  VerifyTolerances tolerances;

  bool verified() const noexcept { return verdict == Verdict::Verified; }
};

/// target == z^T Q z + shift and Q >= -tol * trace.
inline ConstraintCheck check_gram(const GramCertificate& g, const Polynomial& target, const VerifyTolerances& tol = {}) {
  if (static_cast<std::size_t>(g.gram.rows()) != g.basis.size() || g.gram.rows() != g.gram.cols())
    throw DimensionError("Gram block '" + g.label + "' does not match its basis");
  ConstraintCheck c;
  c.label = g.label;
  if (g.shift.n_vars() != target.n_vars()) throw DimensionError("Gram block '" + g.label + "' has the wrong variable count");
  c.reconstruction_error = max_abs_difference(g.reconstruct(), target);
  c.trace = g.gram.trace();
  c.min_eigenvalue = g.gram.rows() > 0 ? min_eigenvalue(detail::symmetrize(g.gram)) : 0.0;
  c.passed = c.reconstruction_error <= tol.reconstruction && c.min_eigenvalue >= -tol.eigenvalue * std::max(c.trace, 0.0);
  return c;
}

namespace detail {

inline const GramCertificate& find_gram(const std::vector<GramCertificate>& grams, const std::string& label) {
  for (const auto& g : grams)
    if (g.label == label) return g;
  throw DomainError("missing Gram block for declared constraint '" + label + "'");
}

inline SampleCheck sample_min(std::string name, const Polynomial& p, const std::vector<std::vector<double>>& points,
                              double offset, const VerifyTolerances& tol) {
  SampleCheck s;
  s.name = std::move(name);
  for (const auto& x : points) s.min_value = std::min(s.min_value, p.evaluate(x) - offset);
  s.count = points.size();
  s.passed = s.min_value >= -tol.sample;
  return s;
}

inline IdentityCheck identity(std::string name, const Polynomial& lhs, const Polynomial& rhs, double tol) {
  IdentityCheck c;
  c.name = std::move(name);
  const double scale = std::max({1.0, lhs.max_abs_coefficient(), rhs.max_abs_coefficient()});
  c.relative_error = max_abs_difference(lhs, rhs) / scale;
  c.holds = c.relative_error <= tol;
  return c;
}

inline void finish(VerificationReport& r) {
  for (const auto& c : r.constraints) {
    if (c.reconstruction_error > r.tolerances.reconstruction)
      r.reasons.push_back("reconstruction error " + format_double(c.reconstruction_error) + " on '" + c.label + "'");
    if (c.min_eigenvalue < -r.tolerances.eigenvalue * std::max(c.trace, 0.0))
      r.reasons.push_back("negative Gram eigenvalue " + format_double(c.min_eigenvalue) + " on '" + c.label + "'");
  }
  for (const auto& i : r.identities)
    if (!i.holds) r.reasons.push_back("identity fails: " + i.name);
  for (const auto& s : r.samples)
    if (!s.passed) r.reasons.push_back("negative sample of " + s.name + ": " + format_double(s.min_value));
  r.verdict = r.reasons.empty() ? Verdict::Verified : Verdict::Rejected;
}

inline void check_dimensions(const Polynomial& v, const Dynamics& sys) {
  sys.validate();
  if (v.n_vars() != sys.n_vars()) throw DimensionError("certificate and system have different dimensions");
}

}  // namespace detail

/// Recomputes every declared constraint from V and the system, then checks
/// Gram reconstruction, eigenvalues and samples. Never calls the solver.
inline VerificationReport verify_certificate(const LyapunovCertificate& cert, const VerifyTolerances& tol = {}) {
  detail::check_dimensions(cert.v, cert.system);
  VerificationReport r;
  r.tolerances = tol;
  if (!cert.decrease_only) {
    if (cert.mode == SearchMode::VSos) {
      r.constraints.push_back(check_gram(detail::find_gram(cert.grams, "V"), cert.v, tol));
    } else {
      r.constraints.push_back(check_gram(detail::find_gram(cert.grams, "thc(V)"), top_homogeneous_component(cert.v), tol));
      if (cert.v.constant_term() != 0.0) r.reasons.push_back("V has a constant term in t.h.c. mode");
    }
  }
  const auto points = verification_samples(cert.v.n_vars());
  r.samples.push_back(detail::sample_min("V", cert.v, points, cert.v.constant_term(), tol));
  for (std::size_t i = 0; i < cert.system.modes(); ++i) {
    const Polynomial dec = cert.system.decrease(cert.v, i);
    const std::string label = cert.system.decrease_label(i);
    r.constraints.push_back(check_gram(detail::find_gram(cert.grams, label), dec, tol));
    r.samples.push_back(detail::sample_min(label, dec, points, 0.0, tol));
  }
  detail::finish(r);
  return r;
}

/// Checks W = base^{2k+2}, -W'_i = (2k+2) base^{2k+1} (-V'_i) and the Gram data.
inline VerificationReport verify_certificate(const PowerCertificate& cert, const VerifyTolerances& tol = {}) {
  detail::check_dimensions(cert.v, cert.system);
  if (cert.system.time != TimeModel::Continuous) throw DomainError("power certificates are continuous-time");
  if (cert.decrease_grams.size() != cert.system.modes())
    throw DomainError("missing Gram block for declared constraint: one -dW/dt block per mode");
  VerificationReport r;
  r.tolerances = tol;
  const Polynomial expected_base =
      cert.planar ? cert.v + Polynomial::constant(cert.v.n_vars(), 1.0) : cert.v;
  r.identities.push_back(detail::identity("base == " + std::string(cert.planar ? "V + 1" : "V"), cert.base,
                                          expected_base, 0.0));
  const auto e = static_cast<unsigned>(2 * cert.k + 2);
  r.identities.push_back(detail::identity("W == base^(2k+2)", cert.w, pow(cert.base, e), tol.identity));
  r.constraints.push_back(check_gram(cert.w_gram, cert.w, tol));
  const auto points = verification_samples(cert.v.n_vars());
  r.samples.push_back(detail::sample_min("W - W(0)", cert.w, points, cert.w.constant_term(), tol));
  for (std::size_t i = 0; i < cert.system.modes(); ++i) {
    const Polynomial wdot_neg = cert.system.decrease(cert.w, i);
    const Polynomial rhs = (2.0 * cert.k + 2.0) * pow(cert.base, e - 1) * cert.system.decrease(cert.base, i);
    const std::string suffix = cert.system.modes() == 1 ? "" : "[" + std::to_string(i + 1) + "]";
    r.identities.push_back(detail::identity("-dW/dt" + suffix + " == (2k+2) base^(2k+1) (-dV/dt)", wdot_neg, rhs,
                                            tol.identity));
    r.constraints.push_back(check_gram(cert.decrease_grams[i], wdot_neg, tol));
    r.samples.push_back(detail::sample_min("-dW/dt" + suffix, wdot_neg, points, 0.0, tol));
  }
  detail::finish(r);
  return r;
}

/// export -> parse -> compare.
inline bool verify_sdpa_roundtrip(const SdpProblem& p) { return parse_sdpa(export_sdpa(p)) == p; }

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : r.constraints)
    cons.push_back({{"label", c.label},
                    {"reconstruction_error", c.reconstruction_error},
                    {"min_eigenvalue", c.min_eigenvalue},
                    {"trace", c.trace},
                    {"passed", c.passed}});
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& i : r.identities) ids.push_back({{"name", i.name}, {"relative_error", i.relative_error}, {"holds", i.holds}});
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"name", s.name}, {"min_value", s.min_value}, {"count", s.count}, {"passed", s.passed}});
  j = {{"verdict", to_string(r.verdict)},
       {"reasons", r.reasons},
       {"constraints", cons},
       {"identities", ids},
       {"samples", samples},
       {"tolerances",
        {{"reconstruction", r.tolerances.reconstruction},
         {"eigenvalue_relative", r.tolerances.eigenvalue},
         {"identity_relative", r.tolerances.identity},
         {"sample", r.tolerances.sample},
         {"solver_eq_tol", 1e-7},
         {"solver_psd_tol", 1e-8}}}};
}

}  // namespace soslyap
