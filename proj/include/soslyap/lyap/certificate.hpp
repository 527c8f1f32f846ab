#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "soslyap/error.hpp"
#include "soslyap/poly/calculus.hpp"
#include "soslyap/poly/text.hpp"
#include "soslyap/poly/vector_field.hpp"
#include "soslyap/sdp/linalg.hpp"
#include "soslyap/sdp/solver.hpp"
#include "soslyap/sos/compile.hpp"

namespace soslyap {

enum class SearchMode { VSos, ThcSos };
enum class TimeModel { Continuous, Discrete };

inline std::string to_string(SearchMode m) { return m == SearchMode::VSos ? "v-sos" : "thc-sos"; }
inline std::string to_string(TimeModel t) { return t == TimeModel::Continuous ? "ct" : "dt"; }

inline SearchMode search_mode_from_string(const std::string& s) {
  if (s == "v-sos") return SearchMode::VSos;
  if (s == "thc-sos") return SearchMode::ThcSos;
  throw DomainError("unknown search mode '" + s + "'");
}

inline TimeModel time_model_from_string(const std::string& s) {
  if (s == "ct") return TimeModel::Continuous;
  if (s == "dt") return TimeModel::Discrete;
  throw DomainError("unknown time model '" + s + "'");
}

/// One or more modes of x' = f_i(x) (continuous) or x+ = A_i x (discrete).
struct Dynamics {
  TimeModel time = TimeModel::Continuous;
  std::vector<VectorField> fields;
  std::vector<LinearSystem> maps;

  static Dynamics continuous(VectorField f) { return Dynamics{TimeModel::Continuous, {std::move(f)}, {}}; }
  static Dynamics continuous(std::vector<VectorField> fs) { return Dynamics{TimeModel::Continuous, std::move(fs), {}}; }
  static Dynamics continuous(const std::vector<LinearSystem>& systems) {
    Dynamics d;
    for (const auto& s : systems) d.fields.push_back(s.as_vector_field());
    return d;
  }
  static Dynamics discrete(std::vector<LinearSystem> systems) {
    return Dynamics{TimeModel::Discrete, {}, std::move(systems)};
  }

  std::size_t modes() const noexcept { return time == TimeModel::Continuous ? fields.size() : maps.size(); }

  std::size_t n_vars() const {
    if (modes() == 0) throw DimensionError("system has no modes");
    return time == TimeModel::Continuous ? fields.front().n_vars() : maps.front().n_vars();
  }

  bool is_homogeneous() const {
    if (time == TimeModel::Discrete) return true;
    for (const auto& f : fields)
      if (!f.is_homogeneous()) return false;
    return true;
  }

  /// -V' along mode i, or V(x) - V(A_i x).
  Polynomial decrease(const Polynomial& v, std::size_t i) const {
    if (time == TimeModel::Continuous) return -lie_derivative(v, fields.at(i));
    return discrete_difference(v, maps.at(i));
  }

  /// Constraint label of the decrease condition of mode i.
  std::string decrease_label(std::size_t i) const {
    std::string base = time == TimeModel::Continuous ? "-dV/dt" : "V-V(Ax)";
    return modes() == 1 ? base : base + "[" + std::to_string(i + 1) + "]";
  }

  void validate() const {
    if (modes() == 0) throw DimensionError("system has no modes");
    const std::size_t n = n_vars();
    for (std::size_t i = 0; i < modes(); ++i) {
      const std::size_t ni = time == TimeModel::Continuous ? fields[i].n_vars() : maps[i].n_vars();
      if (ni != n) throw DimensionError("mode " + std::to_string(i) + " has a different state dimension");
    }
  }
};

/// target = z^T Q z + shift, where shift is the EpsilonPD term (possibly zero).
/// With `homogenized` set, z lives in n+1 variables and the identity holds
/// after substituting the last variable by 1.
struct GramCertificate {
  std::string label;
  std::vector<Monomial> basis;
  Eigen::MatrixXd gram;
  Polynomial shift;
  bool homogenized = false;
  double min_eigenvalue = 0.0;

  Polynomial reconstruct() const {
    const std::size_t n = shift.n_vars();
    Polynomial p = basis.empty() ? Polynomial(n) : gram_polynomial(basis.front().n_vars(), basis, gram);
    if (homogenized && !basis.empty()) p = dehomogenize(p);
    return p + shift;
  }
};

struct LyapunovCertificate {
  Polynomial v;
  SearchMode mode = SearchMode::VSos;
  int degree = 0;
  /// Only the decrease conditions were imposed (no condition on V itself).
  bool decrease_only = false;
  std::vector<GramCertificate> grams;
  Dynamics system;
  double margin = 0.0;

  std::vector<double> margins() const {
    std::vector<double> m;
    for (const auto& g : grams) m.push_back(g.min_eigenvalue);
    return m;
  }
};

/// W = base^{2k+2} with base = V (homogeneous) or V + 1 (planar).
struct PowerCertificate {
  int k = 0;
  Polynomial v;
  Polynomial base;
  Polynomial w;
  bool planar = false;
  /// One per mode: Gram data for -W' along that mode.
  std::vector<GramCertificate> decrease_grams;
  /// W as the square of base^{k+1}.
  GramCertificate w_gram;
  std::vector<int> mode_k;
  Dynamics system;
};

// ---- JSON ------------------------------------------------------------------

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(static_cast<std::size_t>(r)).size()) != cols)
      throw DimensionError("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

inline nlohmann::json monomials_to_json(const std::vector<Monomial>& basis) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : basis) out.push_back(std::vector<int>(m.exponents().begin(), m.exponents().end()));
  return out;
}

inline std::vector<Monomial> monomials_from_json(const nlohmann::json& j) {
  std::vector<Monomial> out;
  for (const auto& e : j) out.emplace_back(e.get<std::vector<int>>());
  return out;
}

inline Polynomial polynomial_from_json(const nlohmann::json& j, std::size_t n_vars) {
  return parse_polynomial(j.get<std::string>(), n_vars);
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const Dynamics& d) {
  j = {{"time", to_string(d.time)}, {"n_vars", d.n_vars()}};
  if (d.time == TimeModel::Continuous) {
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : d.fields) {
      nlohmann::json comps = nlohmann::json::array();
      for (const auto& c : f.components()) comps.push_back(to_string(c));
      fields.push_back(std::move(comps));
    }
    j["fields"] = std::move(fields);
  } else {
    nlohmann::json maps = nlohmann::json::array();
    for (const auto& a : d.maps) maps.push_back(detail::matrix_to_json(a.matrix()));
    j["matrices"] = std::move(maps);
  }
}

/// Accepts {"time": "ct"|"dt", "fields": [[poly, ...], ...]} or
/// {"time": ..., "matrices": [[[...]]]}; "field" is a single-mode shorthand.
inline void from_json(const nlohmann::json& j, Dynamics& d) {
  d = Dynamics{};
  d.time = time_model_from_string(j.value("time", std::string("ct")));
  if (j.contains("matrices")) {
    std::vector<LinearSystem> systems;
    for (const auto& m : j.at("matrices")) systems.emplace_back(detail::matrix_from_json(m));
    if (d.time == TimeModel::Discrete)
      d.maps = std::move(systems);
    else
      for (const auto& s : systems) d.fields.push_back(s.as_vector_field());
  } else {
    if (d.time == TimeModel::Discrete) throw DomainError("discrete-time systems are given by matrices");
    nlohmann::json fields = j.contains("field") ? nlohmann::json::array({j.at("field")}) : j.at("fields");
    for (const auto& f : fields) {
      const std::size_t n = j.contains("n_vars") ? j.at("n_vars").get<std::size_t>() : f.size();
      std::vector<Polynomial> comps;
      for (const auto& c : f) comps.push_back(parse_polynomial(c.get<std::string>(), n));
      d.fields.emplace_back(std::move(comps));
    }
  }
  d.validate();
}

inline void to_json(nlohmann::json& j, const GramCertificate& g) {
  j = {{"label", g.label},
       {"basis", detail::monomials_to_json(g.basis)},
       {"gram", detail::matrix_to_json(g.gram)},
       {"shift", to_string(g.shift)},
       {"homogenized", g.homogenized},
       {"min_eigenvalue", g.min_eigenvalue}};
}

inline GramCertificate gram_certificate_from_json(const nlohmann::json& j, std::size_t n_vars) {
  GramCertificate g;
  g.label = j.at("label").get<std::string>();
  g.basis = detail::monomials_from_json(j.at("basis"));
  g.gram = detail::matrix_from_json(j.at("gram"));
  g.shift = detail::polynomial_from_json(j.at("shift"), n_vars);
  g.homogenized = j.value("homogenized", false);
  g.min_eigenvalue = j.value("min_eigenvalue", 0.0);
  if (static_cast<std::size_t>(g.gram.rows()) != g.basis.size())
    throw DimensionError("Gram block '" + g.label + "' does not match its basis");
  return g;
}

inline void to_json(nlohmann::json& j, const LyapunovCertificate& c) {
  j = {{"kind", "lyapunov"},
       {"V", to_string(c.v)},
       {"mode", to_string(c.mode)},
       {"degree", c.degree},
       {"decrease_only", c.decrease_only},
       {"grams", c.grams},
       {"margins", c.margins()},
       {"margin", c.margin},
       {"system", c.system}};
}

inline void from_json(const nlohmann::json& j, LyapunovCertificate& c) {
  c = LyapunovCertificate{};
  c.system = j.at("system").get<Dynamics>();
  const std::size_t n = c.system.n_vars();
  c.v = detail::polynomial_from_json(j.at("V"), n);
  c.mode = search_mode_from_string(j.at("mode").get<std::string>());
  c.degree = j.value("degree", c.v.degree());
  c.decrease_only = j.value("decrease_only", false);
  c.margin = j.value("margin", 0.0);
  for (const auto& g : j.at("grams")) c.grams.push_back(gram_certificate_from_json(g, n));
}

inline void to_json(nlohmann::json& j, const PowerCertificate& c) {
  j = {{"kind", "power"},
       {"k", c.k},
       {"V", to_string(c.v)},
       {"base", to_string(c.base)},
       {"W", to_string(c.w)},
       {"planar", c.planar},
       {"mode_k", c.mode_k},
       {"w_gram", c.w_gram},
       {"grams", c.decrease_grams},
       {"system", c.system}};
}

inline void from_json(const nlohmann::json& j, PowerCertificate& c) {
  c = PowerCertificate{};
  c.system = j.at("system").get<Dynamics>();
  const std::size_t n = c.system.n_vars();
  c.k = j.at("k").get<int>();
  c.v = detail::polynomial_from_json(j.at("V"), n);
  c.base = detail::polynomial_from_json(j.at("base"), n);
  c.w = detail::polynomial_from_json(j.at("W"), n);
  c.planar = j.value("planar", false);
  c.mode_k = j.value("mode_k", std::vector<int>{});
  c.w_gram = gram_certificate_from_json(j.at("w_gram"), n);
  for (const auto& g : j.at("grams")) c.decrease_grams.push_back(gram_certificate_from_json(g, n));
}

}  // namespace soslyap
