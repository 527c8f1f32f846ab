#pragma once

// Primal-dual path-following interior point method for
//
//   min  f^T u   s.t.  <A_i, X> + B_i u = b_i,  X = diag(X_1..X_k) >= 0,
//
// with free variables u and zero matrix cost. Nesterov-Todd scaling with a
// Mehrotra predictor-corrector step; dense blocks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "soslyap/sdp/linalg.hpp"
#include "soslyap/sos/sdp_problem.hpp"

namespace soslyap::detail {

struct ConicProblem {
  std::vector<Eigen::Index> dims;
  std::vector<std::vector<GramEntry>> rows;  // Gram part of each row
  Eigen::MatrixXd free_coeffs;               // m x n_free
  Eigen::VectorXd rhs;
  Eigen::VectorXd cost;                      // n_free

  Eigen::Index n_rows() const { return static_cast<Eigen::Index>(rows.size()); }
  Eigen::Index n_free() const { return cost.size(); }
};

struct IpmSettings {
  int max_iterations = 200;
  double tolerance = 1e-10;
};

enum class IpmOutcome { Converged, MaxIterations, Stalled, NumericalFailure };

struct IpmResult {
  IpmOutcome outcome = IpmOutcome::NumericalFailure;
  std::vector<Eigen::MatrixXd> x;
  std::vector<Eigen::MatrixXd> z;
  Eigen::VectorXd y;
  Eigen::VectorXd u;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
};

class InteriorPoint {
 public:
  InteriorPoint(const ConicProblem& p, IpmSettings settings) : p_(p), settings_(settings) { index_rows(); }

  IpmResult run() {
    const std::size_t nb = p_.dims.size();
    const Eigen::Index m = p_.n_rows();
    const Eigen::Index nf = p_.n_free();
    Eigen::Index total_dim = 0, max_dim = 1;
    for (auto d : p_.dims) {
      total_dim += d;
      max_dim = std::max(max_dim, d);
    }

    // Starting point in the spirit of SDPT3: scaled identities.
    double xi = std::max(10.0, std::sqrt(static_cast<double>(max_dim)));
    double eta = xi;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double na = row_norm(i);
      xi = std::max(xi, static_cast<double>(max_dim) * (1.0 + std::abs(p_.rhs(i))) / (1.0 + na));
      eta = std::max(eta, na);
    }
    IpmResult r;
    r.x.resize(nb);
    r.z.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      r.x[b] = xi * Eigen::MatrixXd::Identity(p_.dims[b], p_.dims[b]);
      r.z[b] = eta * Eigen::MatrixXd::Identity(p_.dims[b], p_.dims[b]);
    }
    r.y = Eigen::VectorXd::Zero(m);
    r.u = Eigen::VectorXd::Zero(nf);

    const double norm_b = p_.rhs.norm();
    const double norm_f = p_.cost.norm();
    IpmResult best;
    double best_merit = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int iter = 0; iter <= settings_.max_iterations; ++iter) {
      r.iterations = iter;
      // Residuals.
      Eigen::VectorXd rp = p_.rhs - apply_a(r.x) - p_.free_coeffs * r.u;
      std::vector<Eigen::MatrixXd> rd = apply_a_adjoint(r.y);
      double rd_norm2 = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        rd[b] = -rd[b] - r.z[b];
        rd_norm2 += rd[b].squaredNorm();
      }
      Eigen::VectorXd rf = p_.cost - p_.free_coeffs.transpose() * r.y;
      r.primal_objective = p_.cost.dot(r.u);
      r.dual_objective = p_.rhs.dot(r.y);
      r.primal_infeasibility = rp.norm() / (1.0 + norm_b);
      r.dual_infeasibility = std::sqrt(rd_norm2 + rf.squaredNorm()) / (1.0 + norm_f);
      double mu = 0.0;
      for (std::size_t b = 0; b < nb; ++b) mu += (r.x[b].cwiseProduct(r.z[b])).sum();
      mu /= static_cast<double>(std::max<Eigen::Index>(total_dim, 1));
      const double gap = std::abs(r.primal_objective - r.dual_objective) /
                         (1.0 + std::abs(r.primal_objective) + std::abs(r.dual_objective));

      if (!std::isfinite(r.primal_objective) || !std::isfinite(r.dual_objective) || !std::isfinite(mu)) {
        best.outcome = IpmOutcome::NumericalFailure;
        return best.x.empty() ? r : best;
      }
      const double merit = std::max({r.primal_infeasibility, r.dual_infeasibility, gap});
      if (merit < best_merit) {
        best_merit = merit;
        best = r;
        since_best = 0;
      } else if (++since_best > 12) {
        best.outcome = IpmOutcome::Stalled;
        return best;
      }
      if (merit < settings_.tolerance) {
        r.outcome = IpmOutcome::Converged;
        return r;
      }
      if (iter == settings_.max_iterations) break;

      // Nesterov-Todd scaling per block: W = G G^T, G^T Z G = G^{-1} X G^{-T} = diag(v).
      std::vector<Scaling> sc(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        if (!nt_scaling(r.x[b], r.z[b], sc[b])) {
          best.outcome = IpmOutcome::NumericalFailure;
          return best;
        }
      }

      Eigen::MatrixXd kkt = build_kkt(sc);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);

      // Predictor.
      std::vector<Eigen::MatrixXd> rc(nb);
      for (std::size_t b = 0; b < nb; ++b) rc[b] = -r.x[b];
      Direction pred = direction(sc, lu, kkt, rp, rd, rf, rc);
      double ap = 1.0, ad = 1.0;
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_psd_step(sc[b].chol_x, pred.dx[b]));
        ad = std::min(ad, max_psd_step(sc[b].chol_z, pred.dz[b]));
      }
      double mu_aff = 0.0;
      for (std::size_t b = 0; b < nb; ++b)
        mu_aff += ((r.x[b] + ap * pred.dx[b]).cwiseProduct(r.z[b] + ad * pred.dz[b])).sum();
      mu_aff /= static_cast<double>(std::max<Eigen::Index>(total_dim, 1));
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

      // Corrector in the scaled space.
      for (std::size_t b = 0; b < nb; ++b) {
        const auto& s = sc[b];
        Eigen::MatrixXd dxs = s.g_inv * pred.dx[b] * s.g_inv.transpose();
        Eigen::MatrixXd dzs = s.g.transpose() * pred.dz[b] * s.g;
        Eigen::MatrixXd rhs = -(dxs * dzs + dzs * dxs);
        for (Eigen::Index i = 0; i < rhs.rows(); ++i) rhs(i, i) += 2.0 * sigma * mu - 2.0 * s.v(i) * s.v(i);
        for (Eigen::Index i = 0; i < rhs.rows(); ++i)
          for (Eigen::Index j = 0; j < rhs.cols(); ++j) rhs(i, j) /= (s.v(i) + s.v(j));
        rc[b] = symmetrize(s.g * rhs * s.g.transpose());
      }
      Direction corr = direction(sc, lu, kkt, rp, rd, rf, rc);
      double amax_p = std::numeric_limits<double>::infinity(), amax_d = amax_p;
      for (std::size_t b = 0; b < nb; ++b) {
        amax_p = std::min(amax_p, max_psd_step(sc[b].chol_x, corr.dx[b]));
        amax_d = std::min(amax_d, max_psd_step(sc[b].chol_z, corr.dz[b]));
      }
      const double gamma = 0.9 + 0.09 * std::min(ap, ad);
      const double step_p = std::min(1.0, gamma * amax_p);
      const double step_d = std::min(1.0, gamma * amax_d);
      for (std::size_t b = 0; b < nb; ++b) {
        r.x[b] = symmetrize(r.x[b] + step_p * corr.dx[b]);
        r.z[b] = symmetrize(r.z[b] + step_d * corr.dz[b]);
      }
      r.u += step_p * corr.du;
      r.y += step_d * corr.dy;
    }
    best.outcome = IpmOutcome::MaxIterations;
    return best;
  }

 private:
  struct Entry {
    Eigen::Index r, c;
    double v;
  };
  struct RowBlock {
    Eigen::Index row;
    std::vector<Entry> entries;
  };
  struct Scaling {
    Eigen::MatrixXd chol_x, chol_z, g, g_inv, w;
    Eigen::VectorXd v;
  };
  struct Direction {
    std::vector<Eigen::MatrixXd> dx, dz;
    Eigen::VectorXd dy, du;
  };

  void index_rows() {
    per_block_.assign(p_.dims.size(), {});
    for (std::size_t i = 0; i < p_.rows.size(); ++i) {
      std::vector<std::vector<Entry>> tmp(p_.dims.size());
      for (const auto& e : p_.rows[i])
        tmp[e.block].push_back({static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col), e.value});
      for (std::size_t b = 0; b < tmp.size(); ++b)
        if (!tmp[b].empty()) per_block_[b].push_back({static_cast<Eigen::Index>(i), std::move(tmp[b])});
    }
  }

  double row_norm(Eigen::Index i) const {
    double s = 0.0;
    for (const auto& e : p_.rows[static_cast<std::size_t>(i)]) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
    if (p_.n_free() > 0) s += p_.free_coeffs.row(i).squaredNorm();
    return std::sqrt(s);
  }

  Eigen::VectorXd apply_a(const std::vector<Eigen::MatrixXd>& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p_.n_rows());
    for (std::size_t b = 0; b < per_block_.size(); ++b)
      for (const auto& rb : per_block_[b]) {
        double s = 0.0;
        for (const auto& e : rb.entries) s += e.v * (e.r == e.c ? x[b](e.r, e.r) : 2.0 * x[b](e.r, e.c));
        out(rb.row) += s;
      }
    return out;
  }

  std::vector<Eigen::MatrixXd> apply_a_adjoint(const Eigen::VectorXd& y) const {
    std::vector<Eigen::MatrixXd> out(p_.dims.size());
    for (std::size_t b = 0; b < p_.dims.size(); ++b) {
      out[b] = Eigen::MatrixXd::Zero(p_.dims[b], p_.dims[b]);
      for (const auto& rb : per_block_[b]) {
        const double yi = y(rb.row);
        for (const auto& e : rb.entries) {
          out[b](e.r, e.c) += yi * e.v;
          if (e.r != e.c) out[b](e.c, e.r) += yi * e.v;
        }
      }
    }
    return out;
  }

  static bool nt_scaling(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z, Scaling& s) {
    const Eigen::Index n = x.rows();
    Eigen::LLT<Eigen::MatrixXd> lx(x), lz(z);
    if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    s.chol_x = lx.matrixL();
    s.chol_z = lz.matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.chol_x.transpose() * s.chol_z, Eigen::ComputeFullU | Eigen::ComputeFullV);
    s.v = svd.singularValues();
    if (s.v.minCoeff() <= 0.0 || !s.v.allFinite()) return false;
    const Eigen::VectorXd inv_sqrt = s.v.array().rsqrt();
    const Eigen::VectorXd sqrt_v = s.v.array().sqrt();
    s.g = s.chol_x * svd.matrixU() * inv_sqrt.asDiagonal();
    Eigen::MatrixXd linv = s.chol_x.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    s.g_inv = sqrt_v.asDiagonal() * svd.matrixU().transpose() * linv;
    s.w = symmetrize(s.g * s.g.transpose());
    return true;
  }

  /// [[M, B], [B^T, 0]] with M_ij = <A_i, W A_j W>.
  Eigen::MatrixXd build_kkt(const std::vector<Scaling>& sc) const {
    const Eigen::Index m = p_.n_rows(), nf = p_.n_free();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m + nf, m + nf);
    for (std::size_t b = 0; b < per_block_.size(); ++b) {
      const auto& rows = per_block_[b];
      const Eigen::MatrixXd& w = sc[b].w;
      const double n = static_cast<double>(w.rows());
      double nnz = 0.0;
      for (const auto& rb : rows) nnz += static_cast<double>(rb.entries.size());
      const double rows_b = static_cast<double>(rows.size());
      if (nnz * nnz < rows_b * (2.0 * n * n * n + nnz))
        schur_sparse(rows, w, k);
      else
        schur_dense(rows, w, k);
    }
    const Eigen::MatrixXd m_full = k.topLeftCorner(m, m).selfadjointView<Eigen::Upper>();
    k.topLeftCorner(m, m) = m_full;
    if (nf > 0) {
      k.topRightCorner(m, nf) = p_.free_coeffs;
      k.bottomLeftCorner(nf, m) = p_.free_coeffs.transpose();
    }
    return k;
  }

  // Entrywise: <E_e, W E_f W> = w_e w_f (W_rp W_cq + W_rq W_cp), w = sqrt2 off-diagonal, 1/sqrt2 on it.
  static void schur_sparse(const std::vector<RowBlock>& rows, const Eigen::MatrixXd& w, Eigen::MatrixXd& k) {
    const double s2 = std::sqrt(2.0);
    auto weight = [s2](const Entry& e) { return e.r == e.c ? e.v / s2 : e.v * s2; };
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = i; j < rows.size(); ++j) {
        double s = 0.0;
        for (const auto& e : rows[i].entries) {
          const double we = weight(e);
          for (const auto& f : rows[j].entries)
            s += we * weight(f) * (w(e.r, f.r) * w(e.c, f.c) + w(e.r, f.c) * w(e.c, f.r));
        }
        const Eigen::Index a = std::min(rows[i].row, rows[j].row), c = std::max(rows[i].row, rows[j].row);
        k(a, c) += s;
      }
    }
  }

  static void schur_dense(const std::vector<RowBlock>& rows, const Eigen::MatrixXd& w, Eigen::MatrixXd& k) {
    const Eigen::Index n = w.rows();
    Eigen::MatrixXd a(n, n), g(n, n);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      a.setZero();
      for (const auto& e : rows[j].entries) {
        a(e.r, e.c) += e.v;
        if (e.r != e.c) a(e.c, e.r) += e.v;
      }
      g.noalias() = w * a * w;
      for (std::size_t i = 0; i <= j; ++i) {
        double s = 0.0;
        for (const auto& e : rows[i].entries) s += e.v * (e.r == e.c ? g(e.r, e.r) : 2.0 * g(e.r, e.c));
        const Eigen::Index lo = std::min(rows[i].row, rows[j].row), hi = std::max(rows[i].row, rows[j].row);
        k(lo, hi) += s;
      }
    }
  }

  Direction direction(const std::vector<Scaling>& sc, const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                      const Eigen::MatrixXd& kkt, const Eigen::VectorXd& rp, const std::vector<Eigen::MatrixXd>& rd,
                      const Eigen::VectorXd& rf, const std::vector<Eigen::MatrixXd>& rc) const {
    const std::size_t nb = p_.dims.size();
    const Eigen::Index m = p_.n_rows(), nf = p_.n_free();
    std::vector<Eigen::MatrixXd> tmp(nb);
    for (std::size_t b = 0; b < nb; ++b) tmp[b] = rc[b] - sc[b].w * rd[b] * sc[b].w;
    Eigen::VectorXd rhs(m + nf);
    rhs.head(m) = rp - apply_a(tmp);
    rhs.tail(nf) = rf;
    Eigen::VectorXd sol = lu.solve(rhs);
    // One step of iterative refinement.
    sol += lu.solve(rhs - kkt * sol);
    Direction d;
    d.dy = sol.head(m);
    d.du = sol.tail(nf);
    std::vector<Eigen::MatrixXd> aty = apply_a_adjoint(d.dy);
    d.dz.resize(nb);
    d.dx.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      d.dz[b] = symmetrize(rd[b] - aty[b]);
      d.dx[b] = symmetrize(rc[b] - sc[b].w * d.dz[b] * sc[b].w);
    }
    return d;
  }

  const ConicProblem& p_;
  IpmSettings settings_;
  std::vector<std::vector<RowBlock>> per_block_;
};

}  // namespace soslyap::detail
