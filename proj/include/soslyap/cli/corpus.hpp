#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "soslyap/cert/verify.hpp"
#include "soslyap/lyap/power.hpp"
#include "soslyap/lyap/search.hpp"
#include "soslyap/lyap/sos_check.hpp"
#include "soslyap/poly/text.hpp"

namespace soslyap {

enum class EntryKind { Lyapunov, Sos, Power, PlanarPower };

inline std::string to_string(EntryKind k) {
  switch (k) {
    case EntryKind::Lyapunov: return "lyapunov";
    case EntryKind::Sos: return "sos";
    case EntryKind::Power: return "power";
    case EntryKind::PlanarPower: return "planar-power";
  }
  return "lyapunov";
}

/// Where an expected verdict comes from: a published result, a trivial
/// fact, or an independent computation.
enum class Origin { Published, Trivial, Computed };

inline std::string to_string(Origin o) {
  switch (o) {
    case Origin::Published: return "published";
    case Origin::Trivial: return "trivial";
    case Origin::Computed: return "computed";
  }
  return "computed";
}

struct Expectation {
  /// Search degree (Lyapunov entries); 0 otherwise.
  int degree = 0;
  SdpStatus status = SdpStatus::Feasible;
  Origin origin = Origin::Computed;
};

struct CorpusEntry {
  std::string name;
  std::string description;
  EntryKind kind = EntryKind::Lyapunov;
  /// Lyapunov and power entries.
  Dynamics system;
  SearchMode mode = SearchMode::VSos;
  /// Sos entries: the polynomial; power entries: V.
  std::string polynomial;
  std::size_t n_vars = 0;
  bool homogeneous = false;
  std::vector<Expectation> expected;
};

struct CorpusRow {
  std::string label;
  SdpStatus expected = SdpStatus::Feasible;
  SdpStatus actual = SdpStatus::Indeterminate;
  Origin origin = Origin::Computed;
  double margin = 0.0;
  std::string detail;
  bool matches() const noexcept { return expected == actual; }
};

struct CertificateCheck {
  std::string label;
  bool verified = false;
  std::vector<std::string> reasons;
};

struct CorpusResult {
  std::string name;
  std::vector<CorpusRow> rows;
  std::vector<CertificateCheck> certificates;
  std::vector<nlohmann::json> certificate_json;
  std::string error;

  bool ok() const {
    if (!error.empty()) return false;
    for (const auto& r : rows)
      if (!r.matches()) return false;
    for (const auto& c : certificates)
      if (!c.verified) return false;
    return true;
  }
};

namespace detail {

inline VectorField field_from_text(std::initializer_list<const char*> comps) {
  const std::size_t n = comps.size();
  std::vector<Polynomial> out;
  for (const char* c : comps) out.push_back(parse_polynomial(c, n));
  return VectorField(std::move(out));
}

inline Polynomial motzkin() { return parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1", 2); }

inline Polynomial ternary_sextic() {
  return parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2*x3^2 + x3^6", 3) +
         pow(parse_polynomial("x1^2 + x2^2 + x3^2", 3), 3) * (1.0 / 250.0);
}

}  // namespace detail

/// The degree-7 planar field used for the t.h.c. search.
inline VectorField example_thc_field() {
  return detail::field_from_text({"0.36*x1 + 2*x2 - 0.32*x1^7 - 0.02*x1*x2^6 + 8*x2^7 + 3*x1^2*x2^5",
                                  "-2*x1 - 0.44*x2 - 16*x1^7 - x1*x2^6 - 0.16*x2^7 - 0.06*x1^2*x2^5"});
}

/// GAS planar field with a quadratic Lyapunov function but no quadratic sos one.
inline VectorField conservative_field() {
  return detail::field_from_text(
      {"-x1^3*x2^2 + 2*x1^3*x2 - x1^3 + 4*x1^2*x2^2 - 8*x1^2*x2 + 4*x1^2 - x1*x2^4 + 4*x1*x2^3 - 4*x1 + 10*x2^2",
       "-9*x1^2*x2 + 10*x1^2 + 2*x1*x2^3 - 8*x1*x2^2 - 4*x1 - x2^3 + 4*x2^2 - 4*x2"});
}

inline Polynomial motzkin_polynomial() { return detail::motzkin(); }
inline Polynomial nonsos_positive_form() { return detail::ternary_sextic(); }

/// Hurwitz matrices A_i = P^{-1}(K_i - S_i), K_i skew, S_i > 0, so that
/// x^T P x is a common quadratic Lyapunov function.
inline std::vector<LinearSystem> hurwitz_family_with_common_quadratic(std::size_t n, std::size_t modes,
                                                                      unsigned seed, Eigen::MatrixXd* p_out = nullptr) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
  };
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd g = random(ni, ni);
  Eigen::MatrixXd p = g * g.transpose() + Eigen::MatrixXd::Identity(ni, ni);
  if (p_out) *p_out = p;
  std::vector<LinearSystem> out;
  for (std::size_t i = 0; i < modes; ++i) {
    Eigen::MatrixXd k = random(ni, ni);
    k = k - k.transpose().eval();
    Eigen::MatrixXd h = random(ni, ni);
    Eigen::MatrixXd s = h * h.transpose() + 0.5 * Eigen::MatrixXd::Identity(ni, ni);
    out.emplace_back(p.ldlt().solve(k - s));
  }
  return out;
}

/// A with an eigenvalue of positive real part; paired with -A.
inline std::vector<LinearSystem> unstable_pair() {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 1.0, 0.0, -1.0;
  return {LinearSystem(a), LinearSystem(-a)};
}

inline std::vector<CorpusEntry> builtin_corpus() {
  using S = SdpStatus;
  using O = Origin;
  std::vector<CorpusEntry> c;
  {
    CorpusEntry e;
    e.name = "example-thc";
    e.description = "degree-7 planar field, search with t.h.c.(V) sos and -dV/dt sos";
    e.kind = EntryKind::Lyapunov;
    e.system = Dynamics::continuous(example_thc_field());
    e.mode = SearchMode::ThcSos;
    e.expected = {{2, S::Infeasible, O::Published}, {4, S::Infeasible, O::Published},
                  {6, S::Infeasible, O::Published}, {8, S::Feasible, O::Published}};
    c.push_back(std::move(e));
  }
  {
    CorpusEntry e;
    e.name = "conservative-field";
    e.description = "planar field whose minimum sos Lyapunov degree is 4";
    e.kind = EntryKind::Lyapunov;
    e.system = Dynamics::continuous(conservative_field());
    e.mode = SearchMode::VSos;
    e.expected = {{2, S::Infeasible, O::Published}, {4, S::Feasible, O::Published}};
    c.push_back(std::move(e));
  }
  {
    CorpusEntry e;
    e.name = "linear-decay";
    e.description = "x' = -x";
    e.kind = EntryKind::Lyapunov;
    e.system = Dynamics::continuous(detail::field_from_text({"-x1"}));
    e.expected = {{2, S::Feasible, O::Trivial}};
    c.push_back(std::move(e));
  }
  auto sos_entry = [&](std::string name, std::string desc, const Polynomial& p, bool homogeneous, S status, O origin) {
    CorpusEntry e;
    e.name = std::move(name);
    e.description = std::move(desc);
    e.kind = EntryKind::Sos;
    e.polynomial = to_string(p);
    e.n_vars = p.n_vars();
    e.homogeneous = homogeneous;
    e.expected = {{0, status, origin}};
    c.push_back(std::move(e));
  };
  const Polynomial m = detail::motzkin();
  sos_entry("motzkin", "Motzkin polynomial: nonnegative, not sos", m, false, S::Infeasible, O::Published);
  {
    Polynomial shifted(2);
    const Polynomial x1 = Polynomial::variable(2, 0) - Polynomial::constant(2, 1.0);
    const Polynomial x2 = Polynomial::variable(2, 1) - Polynomial::constant(2, 1.0);
    shifted = pow(x1, 4) * pow(x2, 2) + pow(x1, 2) * pow(x2, 4) - 3.0 * pow(x1, 2) * pow(x2, 2) +
              Polynomial::constant(2, 1.0);
    sos_entry("motzkin-shifted", "Motzkin polynomial at (x1-1, x2-1)", shifted, false, S::Infeasible, O::Computed);
  }
  sos_entry("motzkin-homogenized", "homogenized Motzkin form in three variables", homogenize(m, 6), true,
            S::Infeasible, O::Computed);
  sos_entry("motzkin-times-r2", "(x1^2 + x2^2) times the Motzkin polynomial", parse_polynomial("x1^2 + x2^2", 2) * m,
            false, S::Feasible, O::Computed);
  sos_entry("nonsos-form", "positive ternary sextic that is not sos", detail::ternary_sextic(), true, S::Infeasible,
            O::Published);
  sos_entry("gradient-norm", "|grad V|^2 for the ternary sextic", gradient_norm_squared(detail::ternary_sextic()), true,
            S::Feasible, O::Published);
  {
    CorpusEntry e;
    e.name = "power-nonsos-gradient";
    e.description = "W = V^(2k+2) for x' = -grad V with V the non-sos ternary sextic";
    e.kind = EntryKind::Power;
    e.polynomial = to_string(detail::ternary_sextic());
    e.n_vars = 3;
    e.system = Dynamics::continuous(gradient_system(detail::ternary_sextic()));
    e.expected = {{0, S::Feasible, O::Computed}};
    c.push_back(std::move(e));
  }
  {
    CorpusEntry e;
    e.name = "power-quadratic-decay";
    e.description = "W = V^(2k+2) for V = x1^2 + x2^2, f = -x";
    e.kind = EntryKind::Power;
    e.polynomial = "x1^2 + x2^2";
    e.n_vars = 2;
    e.system = Dynamics::continuous(detail::field_from_text({"-x1", "-x2"}));
    e.expected = {{0, S::Feasible, O::Trivial}};
    c.push_back(std::move(e));
  }
  {
    CorpusEntry e;
    e.name = "planar-conservative-field";
    e.description = "W = (V+1)^(2k+2) for V = (x1^2 + x2^2)/2 on the conservative field";
    e.kind = EntryKind::PlanarPower;
    e.polynomial = "0.5*x1^2 + 0.5*x2^2";
    e.n_vars = 2;
    e.system = Dynamics::continuous(conservative_field());
    e.expected = {{0, S::Feasible, O::Computed}};
    c.push_back(std::move(e));
  }
  {
    CorpusEntry e;
    e.name = "switched-common-quadratic";
    e.description = "two Hurwitz modes sharing x^T P x";
    e.kind = EntryKind::Lyapunov;
    e.system = Dynamics::continuous(hurwitz_family_with_common_quadratic(3, 2, 7));
    e.expected = {{2, S::Feasible, O::Computed}};
    c.push_back(std::move(e));
  }
  {
    CorpusEntry e;
    e.name = "switched-unstable-pair";
    e.description = "modes A and -A with A unstable";
    e.kind = EntryKind::Lyapunov;
    e.system = Dynamics::continuous(unstable_pair());
    e.expected = {{2, S::Infeasible, O::Computed}, {4, S::Infeasible, O::Computed}};
    c.push_back(std::move(e));
  }
  {
    Eigen::MatrixXd a1(2, 2), a2(2, 2);
    a1 << 0.3, -0.4, 0.4, 0.3;
    a2 << 0.6, 0.0, 0.0, -0.2;
    CorpusEntry e;
    e.name = "dt-contractions";
    e.description = "discrete-time modes with spectral norm below 1";
    e.kind = EntryKind::Lyapunov;
    e.system = Dynamics::discrete({LinearSystem(a1), LinearSystem(a2)});
    e.expected = {{2, S::Feasible, O::Trivial}};
    c.push_back(std::move(e));
  }
  return c;
}

struct CorpusOptions {
  LyapunovOptions lyapunov;
  PowerOptions power;
};

inline CorpusResult run_entry(const CorpusEntry& e, const CorpusOptions& opt = {}) {
  CorpusResult r;
  r.name = e.name;
  auto add_cert = [&](std::string label, const VerificationReport& rep, nlohmann::json j) {
    r.certificates.push_back({std::move(label), rep.verified(), rep.reasons});
    r.certificate_json.push_back(std::move(j));
  };
  try {
    switch (e.kind) {
      case EntryKind::Lyapunov:
        for (const auto& x : e.expected) {
          const auto s = synthesize_lyapunov(e.system, x.degree, e.mode, opt.lyapunov);
          r.rows.push_back({"degree " + std::to_string(x.degree) + " " + to_string(e.mode), x.status, s.status, x.origin,
                            s.margin, s.note});
          if (s.certificate) {
            const auto rep = verify_certificate(*s.certificate);
            add_cert("degree " + std::to_string(x.degree), rep, nlohmann::json(*s.certificate));
          }
        }
        break;
      case EntryKind::Sos: {
        const Polynomial p = parse_polynomial(e.polynomial, e.n_vars);
        const auto s = check_sos(p, e.homogeneous, opt.lyapunov.solver);
        r.rows.push_back({"sos", e.expected.front().status, s.status, e.expected.front().origin, s.margin, s.note});
        if (s.certificate) {
          const auto chk = check_gram(*s.certificate, p);
          r.certificates.push_back({"gram", chk.passed, {}});
          r.certificate_json.push_back(nlohmann::json(*s.certificate));
        }
        break;
      }
      case EntryKind::Power:
      case EntryKind::PlanarPower: {
        const Polynomial v = parse_polynomial(e.polynomial, e.n_vars);
        const auto s = e.kind == EntryKind::Power ? power_certificate(v, e.system.fields.front(), opt.power)
                                                  : planar_power_certificate(v, e.system.fields.front(), opt.power);
        CorpusRow row{"certificate within k <= " + std::to_string(opt.power.k_max), e.expected.front().status,
                      s.feasible() ? SdpStatus::Feasible : SdpStatus::Indeterminate, e.expected.front().origin, 0.0,
                      s.note};
        if (s.certificate) {
          row.detail = "k = " + std::to_string(s.certificate->k);
          const auto rep = verify_certificate(*s.certificate);
          add_cert("k = " + std::to_string(s.certificate->k), rep, nlohmann::json(*s.certificate));
        }
        r.rows.push_back(std::move(row));
        break;
      }
    }
  } catch (const Error& ex) {
    r.error = ex.what();
  }
  return r;
}

/// Runs entries on up to `jobs` threads; results keep the input order.
inline std::vector<CorpusResult> run_corpus(const std::vector<CorpusEntry>& entries, unsigned jobs = 1,
                                            const CorpusOptions& opt = {}) {
  std::vector<CorpusResult> results(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) results[i] = run_entry(entries[i], opt);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(entries.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

inline void to_json(nlohmann::json& j, const CorpusResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"label", row.label},
                    {"expected", to_string(row.expected)},
                    {"actual", to_string(row.actual)},
                    {"origin", to_string(row.origin)},
                    {"matches", row.matches()},
                    {"margin", std::isfinite(row.margin) ? nlohmann::json(row.margin) : nlohmann::json(nullptr)},
                    {"detail", row.detail}});
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : r.certificates) certs.push_back({{"label", c.label}, {"verified", c.verified}, {"reasons", c.reasons}});
  j = {{"name", r.name}, {"ok", r.ok()}, {"rows", rows}, {"certificates", certs}, {"error", r.error}};
}

}  // namespace soslyap
