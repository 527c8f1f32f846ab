#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "soslyap/error.hpp"

namespace soslyap {

/// One coefficient of a symmetric constraint matrix, upper triangle (row <= col).
///
/// An off-diagonal entry stands for both (row, col) and (col, row), so it
/// contributes value * (Q_rc + Q_cr) to the constraint, matching SDPA.
struct GramEntry {
  std::size_t block = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
  friend bool operator==(const GramEntry&, const GramEntry&) = default;
};

struct FreeEntry {
  std::size_t index = 0;
  double value = 0.0;
  friend bool operator==(const FreeEntry&, const FreeEntry&) = default;
};

/// sum_e value_e <E_e, Q_block> + sum_f value_f u_f = rhs
struct EqualityConstraint {
  std::vector<GramEntry> gram;
  std::vector<FreeEntry> free;
  double rhs = 0.0;
  friend bool operator==(const EqualityConstraint&, const EqualityConstraint&) = default;
};

/// Block-diagonal PSD feasibility problem: find Q_b >= 0 and free u with
/// every EqualityConstraint satisfied. `objective`, when present, is a linear
/// functional of u to be maximized; it is carried for external solvers.
struct SdpProblem {
  std::vector<std::size_t> blocks;
  std::size_t n_free = 0;
  std::vector<EqualityConstraint> constraints;
  std::optional<std::vector<double>> objective;

  std::size_t total_dimension() const {
    std::size_t n = 0;
    for (auto b : blocks) n += b;
    return n;
  }

  /// Throws DimensionError if any entry references an undeclared variable.
  void validate() const {
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& c = constraints[i];
      for (const auto& e : c.gram) {
        if (e.block >= blocks.size())
          throw DimensionError("constraint " + std::to_string(i) + " references block " + std::to_string(e.block));
        if (e.row > e.col || e.col >= blocks[e.block])
          throw DimensionError("constraint " + std::to_string(i) + " has an entry outside the upper triangle of block " +
                               std::to_string(e.block));
      }
      for (const auto& f : c.free)
        if (f.index >= n_free)
          throw DimensionError("constraint " + std::to_string(i) + " references free variable " +
                               std::to_string(f.index));
    }
    if (objective && objective->size() != n_free) throw DimensionError("objective length differs from n_free");
  }

  friend bool operator==(const SdpProblem&, const SdpProblem&) = default;
};

inline void to_json(nlohmann::json& j, const SdpProblem& p) {
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : p.constraints) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& e : c.gram) g.push_back({e.block, e.row, e.col, e.value});
    nlohmann::json f = nlohmann::json::array();
    for (const auto& e : c.free) f.push_back({e.index, e.value});
    cons.push_back({{"gram", g}, {"free", f}});
  }
  nlohmann::json rhs = nlohmann::json::array();
  for (const auto& c : p.constraints) rhs.push_back(c.rhs);
  j = {{"format", "soslyap-sdp/1"}, {"blocks", p.blocks}, {"n_free", p.n_free},
       {"constraints", cons}, {"rhs", rhs}};
  j["objective"] = p.objective ? nlohmann::json(*p.objective) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, SdpProblem& p) {
  p = SdpProblem{};
  p.blocks = j.at("blocks").get<std::vector<std::size_t>>();
  p.n_free = j.at("n_free").get<std::size_t>();
  const auto& cons = j.at("constraints");
  const auto& rhs = j.at("rhs");
  if (cons.size() != rhs.size()) throw DimensionError("constraints and rhs lengths differ");
  for (std::size_t i = 0; i < cons.size(); ++i) {
    EqualityConstraint c;
    for (const auto& e : cons[i].at("gram"))
      c.gram.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<std::size_t>(),
                        e.at(3).get<double>()});
    for (const auto& e : cons[i].at("free")) c.free.push_back({e.at(0).get<std::size_t>(), e.at(1).get<double>()});
    c.rhs = rhs[i].get<double>();
    p.constraints.push_back(std::move(c));
  }
  if (j.contains("objective") && !j.at("objective").is_null())
    p.objective = j.at("objective").get<std::vector<double>>();
  p.validate();
}

}  // namespace soslyap
