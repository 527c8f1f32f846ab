#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "soslyap/error.hpp"

namespace soslyap {

/// Smallest eigenvalue of a symmetric matrix (symmetric to within 1e-10,
/// relative to the largest entry). Empty matrices report +infinity.
inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("min_eigenvalue needs a square matrix");
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError("min_eigenvalue needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace detail {

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Largest step a in (0, inf] with X + a dX >= 0, given a Cholesky factor of X.
inline double max_psd_step(const Eigen::MatrixXd& chol_lower, const Eigen::MatrixXd& dx) {
  if (dx.rows() == 0) return std::numeric_limits<double>::infinity();
  auto l = chol_lower.triangularView<Eigen::Lower>();
  Eigen::MatrixXd t = l.solve(dx);
  Eigen::MatrixXd s = l.solve(t.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(s), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

}  // namespace detail
}  // namespace soslyap
