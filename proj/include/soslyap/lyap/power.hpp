#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soslyap/cert/sampling.hpp"
#include "soslyap/error.hpp"
#include "soslyap/lyap/certificate.hpp"
#include "soslyap/lyap/sos_check.hpp"
#include "soslyap/poly/calculus.hpp"

namespace soslyap {

/// W = V^2. A perfect square, hence sos.
inline Polynomial square_lyapunov(const Polynomial& v) { return v * v; }

/// f = -grad V, so that V' = -|grad V|^2.
inline VectorField gradient_system(const Polynomial& v) {
  if (v.degree() == 0) throw DomainError("gradient system of a constant polynomial");
  std::vector<Polynomial> comps;
  for (const auto& g : gradient(v)) comps.push_back(-g);
  return VectorField(std::move(comps));
}

/// Gram certificate of p^2 over the support of p: Q = c c^T.
inline GramCertificate square_gram(const std::string& label, const Polynomial& p) {
  GramCertificate g;
  g.label = label;
  g.shift = Polynomial(p.n_vars());
  Eigen::VectorXd c(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it, ++i) {
    g.basis.push_back(it->first);
    c(i) = it->second;
  }
  g.gram = c * c.transpose();
  g.min_eigenvalue = g.gram.rows() > 0 ? min_eigenvalue(g.gram) : 0.0;
  return g;
}

/// Gram data of (g^2) * p from Gram data (z, Q) of p: basis {z_a m}, Q' = C Q C^T
/// with C mapping g z_a onto the new basis.
inline GramCertificate multiply_by_square(const GramCertificate& cert, const Polynomial& g) {
  std::map<Monomial, Eigen::Index, GradedOrder> index;
  for (const auto& z : cert.basis)
    for (const auto& [m, c] : g.terms()) index.emplace(z * m, 0);
  GramCertificate out;
  out.label = cert.label;
  out.shift = cert.shift * (g * g);
  out.homogenized = false;
  Eigen::Index next = 0;
  for (auto it = index.rbegin(); it != index.rend(); ++it) {
    it->second = next++;
    out.basis.push_back(it->first);
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(next, static_cast<Eigen::Index>(cert.basis.size()));
  for (std::size_t a = 0; a < cert.basis.size(); ++a)
    for (const auto& [m, coef] : g.terms()) c(index.at(cert.basis[a] * m), static_cast<Eigen::Index>(a)) += coef;
  out.gram = detail::symmetrize(c * cert.gram * c.transpose());
  out.min_eigenvalue = out.gram.rows() > 0 ? min_eigenvalue(out.gram) : 0.0;
  return out;
}

struct PowerOptions {
  int k_max = 5;
  SolverSettings solver;
  /// Sample V > 0 and -V' > 0 before searching.
  bool check_preconditions = true;
  /// EpsilonPD scale of the planar t.h.c. positivity test.
  double thc_eps = 1e-4;
};

struct PowerStep {
  int k = 0;
  std::size_t mode = 0;
  SdpStatus status = SdpStatus::Indeterminate;
  double margin = 0.0;
  std::size_t gram_size = 0;
  std::string note;
};

struct PowerSearch {
  std::optional<PowerCertificate> certificate;
  std::vector<PowerStep> steps;
  std::string note;

  bool feasible() const noexcept { return certificate.has_value(); }
};

namespace detail {

inline void require_positive_on_samples(const Polynomial& p, const std::string& what) {
  for (const auto& x : verification_samples(p.n_vars()))
    if (!(p.evaluate(x) > 0.0)) throw DomainError(what + " is not positive definite (fails at a sample point)");
}

inline GramCertificate scaled(GramCertificate g, double s, std::string label) {
  g.gram *= s;
  g.shift *= s;
  g.min_eigenvalue *= s;
  g.label = std::move(label);
  return g;
}

/// k = 0..k_max on the sos test of target_k; the first Feasible k wins.
template <class TargetFn>
std::optional<std::pair<int, GramCertificate>> sweep_k(TargetFn target_k, std::size_t mode, const PowerOptions& opt,
                                                       std::vector<PowerStep>& steps, bool homogenized) {
  for (int k = 0; k <= opt.k_max; ++k) {
    PowerStep step;
    step.k = k;
    step.mode = mode;
    const Polynomial p = target_k(k);
    try {
      const SosCheck r = check_sos(p, true, opt.solver);
      step.status = r.status;
      step.margin = r.margin;
      step.gram_size = r.gram_size;
      step.note = r.note;
      steps.push_back(step);
      if (r.feasible()) {
        GramCertificate g = *r.certificate;
        g.homogenized = homogenized;
        return std::make_pair(k, std::move(g));
      }
    } catch (const DimensionError& e) {
      step.note = e.what();
      steps.push_back(step);
      break;
    }
  }
  return std::nullopt;
}


}  // namespace detail

/// Homogeneous V, f: first k <= k_max with (-2 V V') V^{2k} sos gives
/// W = V^{2k+2} with -W' = (k+1) (-2 V V') V^{2k} sos.
inline PowerSearch power_certificate(const Polynomial& v, const VectorField& f, const PowerOptions& opt = {}) {
  if (v.n_vars() != f.n_vars()) throw DimensionError("power certificate: V and f have different variable counts");
  if (v.is_zero() || !v.is_homogeneous() || !f.is_homogeneous())
    throw DomainError("power certificate needs homogeneous V and f");
  const Polynomial vdot_neg = -lie_derivative(v, f);
  if (opt.check_preconditions) {
    detail::require_positive_on_samples(v, "V");
    detail::require_positive_on_samples(vdot_neg, "-dV/dt");
  }
  const Polynomial base = 2.0 * v * vdot_neg;
  PowerSearch out;
  auto found = detail::sweep_k([&](int k) { return base * pow(v, static_cast<unsigned>(2 * k)); }, 0, opt, out.steps,
                               false);
  if (!found) {
    out.note = "no certificate up to k = " + std::to_string(opt.k_max) + " (inconclusive)";
    return out;
  }
  const int k = found->first;
  PowerCertificate c;
  c.k = k;
  c.v = v;
  c.base = v;
  c.w = pow(v, static_cast<unsigned>(2 * k + 2));
  c.decrease_grams.push_back(detail::scaled(found->second, k + 1.0, "-dW/dt"));
  c.w_gram = square_gram("W", pow(v, static_cast<unsigned>(k + 1)));
  c.mode_k = {k};
  c.system = Dynamics::continuous(f);
  out.certificate = std::move(c);
  return out;
}

/// Planar V with positive definite t.h.c.: with V~ = V + 1, the first k whose
/// homogenization of (-2 V~ V') V~^{2k} is sos gives W = V~^{2k+2}.
inline PowerSearch planar_power_certificate(const Polynomial& v, const VectorField& f, const PowerOptions& opt = {}) {
  if (v.n_vars() != 2 || f.n_vars() != 2) throw DimensionError("planar power certificate needs two variables");
  if (v.is_zero()) throw DomainError("planar power certificate of the zero polynomial");
  const Polynomial thc = top_homogeneous_component(v);
  const SosCheck thc_pd = check_sos(thc, true, opt.solver, opt.thc_eps);
  if (!thc_pd.feasible())
    throw DomainError("top homogeneous component of V is not certified positive definite (it may have zeros)");
  const Polynomial vdot_neg = -lie_derivative(v, f);
  if (opt.check_preconditions) {
    detail::require_positive_on_samples(v, "V");
    detail::require_positive_on_samples(vdot_neg, "-dV/dt");
  }
  const Polynomial vt = v + Polynomial::constant(2, 1.0);
  const Polynomial base = 2.0 * vt * vdot_neg;
  PowerSearch out;
  auto target = [&](int k) {
    const Polynomial p = base * pow(vt, static_cast<unsigned>(2 * k));
    const Polynomial h = homogenize(p, p.degree());
    if (!(dehomogenize(h) == p)) throw Error("homogenization does not restrict back to the original polynomial");
    return h;
  };
  auto found = detail::sweep_k(target, 0, opt, out.steps, true);
  if (!found) {
    out.note = "no certificate up to k = " + std::to_string(opt.k_max) + " (inconclusive)";
    return out;
  }
  const int k = found->first;
  PowerCertificate c;
  c.k = k;
  c.v = v;
  c.base = vt;
  c.planar = true;
  c.w = pow(vt, static_cast<unsigned>(2 * k + 2));
  GramCertificate g = detail::scaled(found->second, k + 1.0, "-dW/dt");
  g.shift = Polynomial(2);
  c.decrease_grams.push_back(std::move(g));
  c.w_gram = square_gram("W", pow(vt, static_cast<unsigned>(k + 1)));
  c.mode_k = {k};
  c.system = Dynamics::continuous(f);
  out.certificate = std::move(c);
  return out;
}

/// Per-mode minimal k_i, then k = max k_i; lower-k certificates are lifted
/// exactly by the square V^{2(k - k_i)}.
inline PowerSearch common_power_certificate(const Polynomial& v, const std::vector<VectorField>& systems,
                                            const PowerOptions& opt = {}) {
  if (systems.empty()) throw DimensionError("empty system list");
  if (v.is_zero() || !v.is_homogeneous()) throw DomainError("common power certificate needs homogeneous V");
  if (opt.check_preconditions) detail::require_positive_on_samples(v, "V");
  PowerSearch out;
  std::vector<std::pair<int, GramCertificate>> per_mode;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    const auto& f = systems[i];
    if (f.n_vars() != v.n_vars()) throw DimensionError("mode " + std::to_string(i) + " has a different variable count");
    if (!f.is_homogeneous()) throw DomainError("mode " + std::to_string(i) + " is not homogeneous");
    const Polynomial vdot_neg = -lie_derivative(v, f);
    if (opt.check_preconditions) detail::require_positive_on_samples(vdot_neg, "-dV/dt of mode " + std::to_string(i + 1));
    const Polynomial base = 2.0 * v * vdot_neg;
    auto found = detail::sweep_k([&](int k) { return base * pow(v, static_cast<unsigned>(2 * k)); }, i, opt,
                                 out.steps, false);
    if (!found) {
      out.note = "mode " + std::to_string(i + 1) + ": no certificate up to k = " + std::to_string(opt.k_max) +
                 " (inconclusive)";
      return out;
    }
    per_mode.push_back(std::move(*found));
  }
  int k = 0;
  for (const auto& [ki, g] : per_mode) k = std::max(k, ki);
  PowerCertificate c;
  c.k = k;
  c.v = v;
  c.base = v;
  c.w = pow(v, static_cast<unsigned>(2 * k + 2));
  for (std::size_t i = 0; i < per_mode.size(); ++i) {
    const auto& [ki, g] = per_mode[i];
    GramCertificate lifted = ki == k ? g : multiply_by_square(g, pow(v, static_cast<unsigned>(k - ki)));
    c.decrease_grams.push_back(detail::scaled(std::move(lifted), k + 1.0, "-dW/dt[" + std::to_string(i + 1) + "]"));
    c.mode_k.push_back(ki);
  }
  c.w_gram = square_gram("W", pow(v, static_cast<unsigned>(k + 1)));
  c.system = Dynamics::continuous(systems);
  out.certificate = std::move(c);
  return out;
}

}  // namespace soslyap
