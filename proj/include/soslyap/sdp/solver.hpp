#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "soslyap/error.hpp"
#include "soslyap/sdp/ipm.hpp"
#include "soslyap/sdp/linalg.hpp"
#include "soslyap/sos/sdp_problem.hpp"

namespace soslyap {

inline constexpr double kReferenceTraceCap = 1e4;

struct SolverSettings {
  double eq_tol = 1e-7;
  /// Relative to the block trace.
  double psd_tol = 1e-8;
  double margin_tol = 1e-7;
  int max_iterations = 200;
  double trace_cap = 1e4;
  std::size_t max_total_dimension = 200;
  double ipm_tolerance = 1e-13;
  /// Restrict to the range of singular optimal points when the margin is zero.
  bool facial_reduction = true;
  /// Eigenvalues below this fraction of the largest count as zero on the face.
  double range_tol = 1e-9;
};

enum class SdpStatus { Feasible, Infeasible, Indeterminate };

inline std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Feasible: return "feasible";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

inline SdpStatus status_from_string(const std::string& s) {
  if (s == "feasible") return SdpStatus::Feasible;
  if (s == "infeasible") return SdpStatus::Infeasible;
  if (s == "indeterminate") return SdpStatus::Indeterminate;
  throw DomainError("unknown SDP status '" + s + "'");
}

struct SdpResiduals {
  double max_eq_violation = std::numeric_limits<double>::infinity();
  double min_eigenvalue = -std::numeric_limits<double>::infinity();
};

struct SdpSolution {
  SdpStatus status = SdpStatus::Indeterminate;
  /// Optimal lambda of the margin problem (on the reduced face after facial reduction).
  double margin = std::numeric_limits<double>::quiet_NaN();
  /// Upper bound on the margin from the dual point.
  double dual_bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<double> free;
  SdpResiduals residuals;
  int iterations = 0;
  int facial_reductions = 0;
  std::string note;

  bool feasible() const noexcept { return status == SdpStatus::Feasible; }
};

/// Absolute residual of every equality at (Q, u).
inline std::vector<double> equality_residuals(const SdpProblem& p, const std::vector<Eigen::MatrixXd>& q,
                                              const std::vector<double>& u) {
  if (q.size() != p.blocks.size() || u.size() != p.n_free) throw DimensionError("point does not match the problem");
  for (std::size_t b = 0; b < q.size(); ++b)
    if (q[b].rows() != static_cast<Eigen::Index>(p.blocks[b]) || q[b].cols() != q[b].rows())
      throw DimensionError("block " + std::to_string(b) + " has the wrong size");
  std::vector<double> out;
  out.reserve(p.constraints.size());
  for (const auto& c : p.constraints) {
    double s = -c.rhs;
    for (const auto& e : c.gram) {
      const auto& m = q[e.block];
      const auto r = static_cast<Eigen::Index>(e.row), k = static_cast<Eigen::Index>(e.col);
      s += e.value * (r == k ? m(r, r) : m(r, k) + m(k, r));
    }
    for (const auto& f : c.free) s += f.value * u[f.index];
    out.push_back(s);
  }
  return out;
}

inline SdpResiduals compute_residuals(const SdpProblem& p, const std::vector<Eigen::MatrixXd>& q,
                                      const std::vector<double>& u) {
  SdpResiduals r;
  r.max_eq_violation = 0.0;
  for (double v : equality_residuals(p, q, u)) r.max_eq_violation = std::max(r.max_eq_violation, std::abs(v));
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& m : q) r.min_eigenvalue = std::min(r.min_eigenvalue, min_eigenvalue(detail::symmetrize(m)));
  return r;
}

namespace detail {

struct MarginRun {
  IpmResult ipm;
  double lambda = 0.0;
  double dual_bound = std::numeric_limits<double>::infinity();
  bool dual_reliable = false;
  double trace_dual = 0.0;
  std::vector<Eigen::MatrixXd> q;      // per block of the input problem
  std::vector<Eigen::MatrixXd> z;      // dual slack per block (zero-size blocks empty)
  std::vector<double> u;
  bool inconsistent = false;
};

/// max lambda  s.t.  Q_b - lambda I >= 0, equalities, sum tr Q_b <= trace_cap.
inline MarginRun maximize_margin(const SdpProblem& p, const SolverSettings& s) {
  MarginRun out;
  // The IPM works in units where the trace cap is kReferenceTraceCap, so
  // jointly rescaled problems give the same iterates.
  const double unit = s.trace_cap / kReferenceTraceCap;
  const std::size_t nb = p.blocks.size();
  std::vector<long> block_map(nb, -1);
  ConicProblem c;
  double total_dim = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    if (p.blocks[b] == 0) continue;
    block_map[b] = static_cast<long>(c.dims.size());
    c.dims.push_back(static_cast<Eigen::Index>(p.blocks[b]));
    total_dim += static_cast<double>(p.blocks[b]);
  }
  const std::size_t slack_block = c.dims.size();
  c.dims.push_back(1);

  std::vector<long> free_map(p.n_free, -1);
  Eigen::Index n_active = 0;
  for (const auto& con : p.constraints)
    for (const auto& f : con.free)
      if (f.value != 0.0 && free_map[f.index] < 0) free_map[f.index] = n_active++;
  const Eigen::Index lambda_col = n_active;
  const Eigen::Index nf = n_active + 1;

  std::vector<std::vector<GramEntry>> rows;
  std::vector<Eigen::VectorXd> free_rows;
  std::vector<double> rhs;
  for (const auto& con : p.constraints) {
    std::vector<GramEntry> g;
    Eigen::VectorXd fr = Eigen::VectorXd::Zero(nf);
    double norm2 = 0.0;
    for (const auto& e : con.gram) {
      if (e.value == 0.0) continue;
      GramEntry ge = e;
      ge.block = static_cast<std::size_t>(block_map[e.block]);
      g.push_back(ge);
      if (e.row == e.col) fr(lambda_col) += e.value;
      norm2 += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
    }
    for (const auto& f : con.free)
      if (f.value != 0.0) fr(free_map[f.index]) += f.value;
    norm2 += fr.squaredNorm();
    if (norm2 == 0.0) {
      if (std::abs(con.rhs) > s.eq_tol) out.inconsistent = true;
      continue;
    }
    const double norm = std::sqrt(norm2);
    for (auto& e : g) e.value /= norm;
    rows.push_back(std::move(g));
    free_rows.push_back(fr / norm);
    rhs.push_back(con.rhs / unit / norm);
  }
  if (out.inconsistent) return out;
  {
    std::vector<GramEntry> g;
    for (std::size_t b = 0; b < slack_block; ++b)
      for (std::size_t a = 0; a < static_cast<std::size_t>(c.dims[b]); ++a) g.push_back({b, a, a, 1.0});
    g.push_back({slack_block, 0, 0, 1.0});
    Eigen::VectorXd fr = Eigen::VectorXd::Zero(nf);
    fr(lambda_col) = total_dim;
    const double norm = std::sqrt(total_dim + 1.0 + total_dim * total_dim);
    for (auto& e : g) e.value /= norm;
    rows.push_back(std::move(g));
    free_rows.push_back(fr / norm);
    rhs.push_back(kReferenceTraceCap / norm);
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  c.rows = std::move(rows);
  c.free_coeffs.resize(m, nf);
  c.rhs.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    c.free_coeffs.row(i) = free_rows[static_cast<std::size_t>(i)].transpose();
    c.rhs(i) = rhs[static_cast<std::size_t>(i)];
  }
  c.cost = Eigen::VectorXd::Zero(nf);
  c.cost(lambda_col) = -1.0;

  InteriorPoint ipm(c, IpmSettings{s.max_iterations, s.ipm_tolerance});
  out.ipm = ipm.run();
  if (out.ipm.x.empty()) return out;
  out.lambda = unit * out.ipm.u(lambda_col);
  out.dual_bound = -unit * out.ipm.dual_objective;
  out.dual_reliable = out.ipm.dual_infeasibility < 1e-7;
  out.trace_dual = out.ipm.y(m - 1) * s.trace_cap / std::sqrt(total_dim + 1.0 + total_dim * total_dim);
  out.q.resize(nb);
  out.z.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto n = static_cast<Eigen::Index>(p.blocks[b]);
    if (block_map[b] < 0) {
      out.q[b] = Eigen::MatrixXd::Zero(n, n);
      out.z[b] = Eigen::MatrixXd::Zero(n, n);
      continue;
    }
    const auto k = static_cast<std::size_t>(block_map[b]);
    out.q[b] = unit * out.ipm.x[k] + out.lambda * Eigen::MatrixXd::Identity(n, n);
    out.z[b] = out.ipm.z[k];
  }
  out.u.assign(p.n_free, 0.0);
  for (std::size_t j = 0; j < p.n_free; ++j)
    if (free_map[j] >= 0) out.u[j] = unit * out.ipm.u(free_map[j]);
  return out;
}

/// Minimum-norm correction of (Q, u) onto the affine equality set.
inline void polish(const SdpProblem& p, std::vector<Eigen::MatrixXd>& q, std::vector<double>& u) {
  std::vector<std::size_t> offset(p.blocks.size() + 1, 0);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) offset[b + 1] = offset[b] + p.blocks[b] * p.blocks[b];
  const std::size_t n_vars = offset.back() + p.n_free;
  const auto m = static_cast<Eigen::Index>(p.constraints.size());
  if (m == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& con = p.constraints[static_cast<std::size_t>(i)];
    for (const auto& e : con.gram) {
      const std::size_t n = p.blocks[e.block];
      trip.emplace_back(i, static_cast<Eigen::Index>(offset[e.block] + e.row * n + e.col), e.value);
      if (e.row != e.col) trip.emplace_back(i, static_cast<Eigen::Index>(offset[e.block] + e.col * n + e.row), e.value);
    }
    for (const auto& f : con.free) trip.emplace_back(i, static_cast<Eigen::Index>(offset.back() + f.index), f.value);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(m, static_cast<Eigen::Index>(n_vars));
  a.setFromTriplets(trip.begin(), trip.end());
  const auto res = equality_residuals(p, q, u);
  Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(res.data(), m);
  Eigen::MatrixXd aat = Eigen::MatrixXd(a * a.transpose());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(aat);
  Eigen::VectorXd w = cod.solve(r);
  Eigen::VectorXd delta = a.transpose() * w;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto n = static_cast<Eigen::Index>(p.blocks[b]);
    Eigen::Map<const Eigen::MatrixXd> d(delta.data() + offset[b], n, n);
    q[b] = symmetrize(q[b] - d.transpose());
  }
  for (std::size_t j = 0; j < p.n_free; ++j) u[j] -= delta(static_cast<Eigen::Index>(offset.back() + j));
}

/// Alternates the least-norm equality correction with clipping of negative
/// eigenvalues until both checks pass. Returns false after `rounds` tries.
inline bool alternate_projections(const SdpProblem& p, std::vector<Eigen::MatrixXd>& q, std::vector<double>& u,
                                  const SolverSettings& s, int rounds = 50) {
  for (int r = 0; r < rounds; ++r) {
    polish(p, q, u);
    bool psd = true;
    std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eig(q.size());
    for (std::size_t b = 0; b < q.size(); ++b) {
      if (q[b].rows() == 0) continue;
      eig[b].compute(q[b]);
      if (eig[b].eigenvalues()(0) < -s.psd_tol * std::max(q[b].trace(), 0.0)) psd = false;
    }
    if (psd && compute_residuals(p, q, u).max_eq_violation <= s.eq_tol) return true;
    for (std::size_t b = 0; b < q.size(); ++b) {
      if (q[b].rows() == 0) continue;
      const Eigen::VectorXd d = eig[b].eigenvalues().cwiseMax(0.0);
      q[b] = symmetrize(eig[b].eigenvectors() * d.asDiagonal() * eig[b].eigenvectors().transpose());
    }
  }
  return false;
}

/// The problem in the coordinates Q_b = U_b Q'_b U_b^T.
inline SdpProblem restrict_to_subspace(const SdpProblem& p, const std::vector<Eigen::MatrixXd>& u_basis) {
  SdpProblem out;
  out.n_free = p.n_free;
  out.objective = p.objective;
  for (const auto& ub : u_basis) out.blocks.push_back(static_cast<std::size_t>(ub.cols()));
  for (const auto& con : p.constraints) {
    std::vector<Eigen::MatrixXd> a(p.blocks.size());
    for (const auto& e : con.gram) {
      if (a[e.block].size() == 0) a[e.block] = Eigen::MatrixXd::Zero(u_basis[e.block].rows(), u_basis[e.block].rows());
      const auto r = static_cast<Eigen::Index>(e.row), k = static_cast<Eigen::Index>(e.col);
      a[e.block](r, k) += e.value;
      if (r != k) a[e.block](k, r) += e.value;
    }
    EqualityConstraint ec;
    ec.free = con.free;
    ec.rhs = con.rhs;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      if (a[b].size() == 0 || u_basis[b].cols() == 0) continue;
      const Eigen::MatrixXd ar = u_basis[b].transpose() * a[b] * u_basis[b];
      for (Eigen::Index r = 0; r < ar.rows(); ++r)
        for (Eigen::Index k = r; k < ar.cols(); ++k)
          if (ar(r, k) != 0.0) ec.gram.push_back({b, static_cast<std::size_t>(r), static_cast<std::size_t>(k), ar(r, k)});
    }
    out.constraints.push_back(std::move(ec));
  }
  return out;
}


inline constexpr int kMaxFacialReductions = 3;

inline SdpSolution solve_with_faces(const SdpProblem& problem, const SolverSettings& settings, int depth) {
  problem.validate();
  if (problem.total_dimension() > settings.max_total_dimension)
    throw DimensionError("total matrix dimension " + std::to_string(problem.total_dimension()) + " exceeds the cap of " +
                         std::to_string(settings.max_total_dimension));
  SdpSolution sol;
  const std::size_t nb = problem.blocks.size();
  detail::MarginRun run = detail::maximize_margin(problem, settings);
  if (run.inconsistent) {
    sol.status = SdpStatus::Infeasible;
    sol.margin = -std::numeric_limits<double>::infinity();
    sol.note = "equality with no variables and nonzero right-hand side";
    return sol;
  }
  sol.iterations = run.ipm.iterations;
  if (run.ipm.x.empty()) {
    sol.note = "interior point method failed numerically";
    return sol;
  }
  sol.margin = run.lambda;
  sol.dual_bound = run.dual_bound;
  sol.blocks = run.q;
  sol.free = run.u;
  sol.residuals = compute_residuals(problem, sol.blocks, sol.free);

  auto psd_ok = [&](const std::vector<Eigen::MatrixXd>& q) {
    for (const auto& m : q)
      if (m.rows() > 0 && min_eigenvalue(detail::symmetrize(m)) < -settings.psd_tol * std::max(m.trace(), 0.0)) return false;
    return true;
  };

  if (run.lambda > settings.margin_tol) {
    if (sol.residuals.max_eq_violation > 0.1 * settings.eq_tol) {
      detail::polish(problem, sol.blocks, sol.free);
      sol.residuals = compute_residuals(problem, sol.blocks, sol.free);
    }
    if (sol.residuals.max_eq_violation <= settings.eq_tol && psd_ok(sol.blocks)) {
      sol.status = SdpStatus::Feasible;
      return sol;
    }
  }
  if (run.dual_reliable && run.dual_bound < -settings.margin_tol) {
    sol.status = SdpStatus::Infeasible;
    return sol;
  }
  const bool converged = run.ipm.outcome == detail::IpmOutcome::Converged;
  if (run.lambda > settings.margin_tol) {
    sol.note = "positive margin but the recovered point fails the residual checks";
    return sol;
  }
  if (!settings.facial_reduction || run.lambda < -settings.margin_tol) {
    sol.note = converged ? "optimal margin is numerically zero" : "interior point method did not converge";
    return sol;
  }

  // Face spanned by the near-optimal point. Candidate ranks, in order: strict
  // complementarity with the dual slack, eigenvalue cuts relative to the
  // largest eigenvalue, and the widest spectral gap. The first face passing
  // the residual and eigenvalue checks is returned.
  double q_scale = 0.0, z_scale = 0.0;
  std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eig(nb);
  std::vector<Eigen::VectorXd> z_diag(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    if (problem.blocks[b] == 0) continue;
    eig[b].compute(detail::symmetrize(run.q[b]));
    q_scale = std::max(q_scale, eig[b].eigenvalues().maxCoeff());
    z_diag[b] = (eig[b].eigenvectors().transpose() * run.z[b] * eig[b].eigenvectors()).diagonal();
    z_scale = std::max(z_scale, z_diag[b].maxCoeff());
  }
  using Mask = std::vector<std::vector<bool>>;
  std::vector<Mask> masks;
  auto cut_mask = [&](double cut) {
    Mask m(nb);
    for (std::size_t b = 0; b < nb; ++b)
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(problem.blocks[b]); ++i)
        m[b].push_back(eig[b].eigenvalues()(i) > cut * q_scale);
    return m;
  };
  if (z_scale > 0.0) {
    Mask m(nb);
    for (std::size_t b = 0; b < nb; ++b)
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(problem.blocks[b]); ++i)
        m[b].push_back(eig[b].eigenvalues()(i) / q_scale > z_diag[b](i) / z_scale);
    masks.push_back(std::move(m));
  }
  for (double cut : {settings.range_tol, 1e-7, 1e-5, 1e-3}) masks.push_back(cut_mask(cut));
  {
    std::vector<double> rel;
    for (std::size_t b = 0; b < nb; ++b)
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(problem.blocks[b]); ++i)
        rel.push_back(std::max(eig[b].eigenvalues()(i) / q_scale, 1e-300));
    std::sort(rel.begin(), rel.end());
    double best = 0.0, cut = 0.0;
    for (std::size_t i = 0; i + 1 < rel.size(); ++i) {
      const double gap = std::log(rel[i + 1] / rel[i]);
      if (gap > best) best = gap, cut = std::sqrt(rel[i] * rel[i + 1]);
    }
    if (best > std::log(1e3)) masks.push_back(cut_mask(cut));
  }
  std::vector<Mask> tried;
  std::vector<std::pair<std::vector<Eigen::MatrixXd>, SdpProblem>> faces;
  for (const Mask& mask : masks) {
    if (std::find(tried.begin(), tried.end(), mask) != tried.end()) continue;
    tried.push_back(mask);
    std::size_t kept = 0;
    for (const auto& m : mask) kept += static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
    if (kept == problem.total_dimension()) continue;
    std::vector<Eigen::MatrixXd> basis(nb), local(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto n = static_cast<Eigen::Index>(problem.blocks[b]);
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = 0; i < n; ++i)
        if (mask[b][static_cast<std::size_t>(i)]) keep.push_back(i);
      basis[b].resize(n, static_cast<Eigen::Index>(keep.size()));
      local[b] = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        basis[b].col(kk) = eig[b].eigenvectors().col(keep[k]);
        local[b](kk, kk) = eig[b].eigenvalues()(keep[k]);
      }
    }
    const SdpProblem face = detail::restrict_to_subspace(problem, basis);
    std::vector<double> u = run.u;
    if (compute_residuals(face, local, u).max_eq_violation > 0.1 * settings.eq_tol) {
      std::vector<Eigen::MatrixXd> polished = local;
      std::vector<double> pu = u;
      detail::polish(face, polished, pu);
      double polished_margin = std::numeric_limits<double>::infinity();
      for (const auto& m : polished)
        if (m.rows() > 0) polished_margin = std::min(polished_margin, min_eigenvalue(detail::symmetrize(m)));
      if (polished_margin > settings.margin_tol &&
          compute_residuals(face, polished, pu).max_eq_violation < compute_residuals(face, local, u).max_eq_violation) {
        local = std::move(polished);
        u = std::move(pu);
      }
    }
    double face_margin = std::numeric_limits<double>::infinity();
    for (const auto& m : local)
      if (m.rows() > 0) face_margin = std::min(face_margin, min_eigenvalue(detail::symmetrize(m)));
    std::vector<Eigen::MatrixXd> q(nb);
    for (std::size_t b = 0; b < nb; ++b) q[b] = detail::symmetrize(basis[b] * local[b] * basis[b].transpose());
    const SdpResiduals res = compute_residuals(problem, q, u);
    if (face_margin > settings.margin_tol && res.max_eq_violation <= settings.eq_tol && psd_ok(q)) {
      sol.status = SdpStatus::Feasible;
      sol.margin = face_margin;
      sol.blocks = std::move(q);
      sol.free = std::move(u);
      sol.residuals = res;
      sol.facial_reductions = 1;
      sol.note = "every feasible point is singular; margin measured on the range of the returned point";
      return sol;
    }
    faces.emplace_back(std::move(basis), face);
  }
  // Truncation broke the equalities: keep the near-optimal point itself and
  // measure its margin on the detected range.
  {
    std::vector<Eigen::MatrixXd> q = run.q;
    std::vector<double> u = run.u;
    bool ok = compute_residuals(problem, q, u).max_eq_violation <= 0.1 * settings.eq_tol && psd_ok(q);
    if (!ok) ok = detail::alternate_projections(problem, q, u, settings);
    const SdpResiduals res = compute_residuals(problem, q, u);
    if (ok && res.max_eq_violation <= settings.eq_tol && psd_ok(q)) {
      std::vector<Eigen::VectorXd> final_eig(nb);
      for (std::size_t b = 0; b < nb; ++b)
        if (problem.blocks[b] > 0) final_eig[b] = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q[b]).eigenvalues();
      for (const Mask& mask : tried) {
        double range_margin = std::numeric_limits<double>::infinity();
        std::size_t kept = 0;
        for (std::size_t b = 0; b < nb; ++b) {
          const auto k = static_cast<Eigen::Index>(std::count(mask[b].begin(), mask[b].end(), true));
          if (k == 0) continue;
          kept += static_cast<std::size_t>(k);
          range_margin = std::min(range_margin, final_eig[b](final_eig[b].size() - k));
        }
        if (kept == 0 || kept == problem.total_dimension() || range_margin <= settings.margin_tol) continue;
        sol.status = SdpStatus::Feasible;
        sol.margin = range_margin;
        sol.blocks = std::move(q);
        sol.free = std::move(u);
        sol.residuals = res;
        sol.facial_reductions = 1;
        sol.note = "every feasible point is singular; margin measured on the range of the returned point";
        return sol;
      }
    }
  }
  // The near-optimal point is not centred on its face: re-solve on each face.
  if (depth < kMaxFacialReductions) {
    for (const auto& [basis, face] : faces) {
      SdpSolution sub = solve_with_faces(face, settings, depth + 1);
      if (sub.status != SdpStatus::Feasible) continue;
      std::vector<Eigen::MatrixXd> q(nb);
      for (std::size_t b = 0; b < nb; ++b) q[b] = detail::symmetrize(basis[b] * sub.blocks[b] * basis[b].transpose());
      const SdpResiduals res = compute_residuals(problem, q, sub.free);
      if (res.max_eq_violation > settings.eq_tol || !psd_ok(q)) continue;
      sol.status = SdpStatus::Feasible;
      sol.margin = sub.margin;
      sol.blocks = std::move(q);
      sol.free = std::move(sub.free);
      sol.residuals = res;
      sol.iterations += sub.iterations;
      sol.facial_reductions = 1 + sub.facial_reductions;
      sol.note = "every feasible point is singular; margin measured on the range of the returned point";
      return sol;
    }
  }
  sol.note = "optimal margin is numerically zero and no face with a positive margin was found";
  return sol;
}

}  // namespace detail

/// Decides feasibility of `problem` by margin maximization. When the optimal
/// margin is numerically zero (every feasible Gram matrix is singular), the
/// problem is restricted to the range of the near-optimal point and solved
/// again there, at most three times.
inline SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings = {}) {
  return detail::solve_with_faces(problem, settings, 0);
}

inline void to_json(nlohmann::json& j, const SdpSolution& s) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& q : s.blocks) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < q.cols(); ++c) row.push_back(q(r, c));
      rows.push_back(std::move(row));
    }
    blocks.push_back(std::move(rows));
  }
  j = {{"status", to_string(s.status)},
       {"margin", num(s.margin)},
       {"dual_bound", num(s.dual_bound)},
       {"residuals", {{"max_eq_violation", num(s.residuals.max_eq_violation)}, {"min_eigenvalue", num(s.residuals.min_eigenvalue)}}},
       {"blocks", blocks},
       {"free", s.free},
       {"iterations", s.iterations},
       {"facial_reductions", s.facial_reductions},
       {"note", s.note}};
}

inline void from_json(const nlohmann::json& j, SdpSolution& s) {
  auto num = [](const nlohmann::json& v, double fallback) { return v.is_null() ? fallback : v.get<double>(); };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s = SdpSolution{};
  s.status = status_from_string(j.at("status").get<std::string>());
  s.margin = num(j.at("margin"), nan);
  s.dual_bound = num(j.at("dual_bound"), nan);
  s.residuals.max_eq_violation = num(j.at("residuals").at("max_eq_violation"), std::numeric_limits<double>::infinity());
  s.residuals.min_eigenvalue = num(j.at("residuals").at("min_eigenvalue"), std::numeric_limits<double>::infinity());
  for (const auto& rows : j.at("blocks")) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd q(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (rows[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(n)) throw DimensionError("block matrix is not square");
      for (Eigen::Index c = 0; c < n; ++c) q(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    s.blocks.push_back(std::move(q));
  }
  s.free = j.at("free").get<std::vector<double>>();
  s.iterations = j.value("iterations", 0);
  s.facial_reductions = j.value("facial_reductions", 0);
  s.note = j.value("note", "");
}

}  // namespace soslyap
