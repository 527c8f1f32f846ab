#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "soslyap/cli/corpus.hpp"
#include "soslyap/lyap/search.hpp"
#include "soslyap/sdp/solver.hpp"
#include "soslyap/sos/compile.hpp"

using namespace soslyap;

namespace {

SdpProblem scalar_problem(double rhs) {
  SdpProblem p;
  p.blocks = {1};
  p.constraints.push_back({{{0, 0, 0, 1.0}}, {}, rhs});
  return p;
}

SdpProblem sos_problem(const Polynomial& p) {
  return compile({make_sos_constraint("p", AffinePolynomial(p), false)}, {}).problem;
}

SdpProblem lyapunov_problem(const VectorField& f, int degree, SearchMode mode) {
  return lyapunov_program(Dynamics::continuous(f), degree, mode).compile_program().problem;
}

// Residuals and eigenvalues recomputed from the problem data only.
void expect_feasible_point(const SdpProblem& p, const SdpSolution& s, const SolverSettings& set = {}) {
  ASSERT_EQ(s.blocks.size(), p.blocks.size());
  for (const auto& c : p.constraints) {
    double lhs = 0.0;
    for (const auto& e : c.gram) {
      const auto& q = s.blocks[e.block];
      const auto r = static_cast<Eigen::Index>(e.row), k = static_cast<Eigen::Index>(e.col);
      lhs += e.value * (r == k ? q(r, r) : q(r, k) + q(k, r));
    }
    for (const auto& f : c.free) lhs += f.value * s.free[f.index];
    EXPECT_LE(std::abs(lhs - c.rhs), set.eq_tol);
  }
  for (const auto& q : s.blocks) {
    if (q.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (q + q.transpose()));
    EXPECT_GE(es.eigenvalues()(0), -set.psd_tol * std::max(q.trace(), 0.0));
  }
  EXPECT_GT(s.margin, 0.0);
}

SdpProblem permuted(const SdpProblem& p, std::mt19937& rng) {
  SdpProblem out = p;
  std::shuffle(out.constraints.begin(), out.constraints.end(), rng);
  return out;
}

SdpProblem scaled(const SdpProblem& p, double s) {
  SdpProblem out = p;
  for (auto& c : out.constraints) c.rhs *= s;
  return out;
}

}  // namespace

TEST(MinEigenvalue, Examples) {
  EXPECT_NEAR(min_eigenvalue(Eigen::MatrixXd::Identity(3, 3)), 1.0, 1e-14);
  EXPECT_NEAR(min_eigenvalue(Eigen::MatrixXd::Ones(2, 2)), 0.0, 1e-14);
  EXPECT_NEAR(min_eigenvalue(Eigen::Vector3d(2, -3, 5).asDiagonal().toDenseMatrix()), -3.0, 1e-14);
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(min_eigenvalue(a), DomainError);
}

TEST(Solve, ScalarFeasible) {
  const auto p = scalar_problem(1.0);
  const auto s = solve(p);
  ASSERT_EQ(s.status, SdpStatus::Feasible);
  EXPECT_NEAR(s.blocks[0](0, 0), 1.0, 1e-7);
  EXPECT_NEAR(s.margin, 1.0, 1e-6);
  expect_feasible_point(p, s);
}

TEST(Solve, ScalarInfeasible) {
  const auto s = solve(scalar_problem(-1.0));
  EXPECT_EQ(s.status, SdpStatus::Infeasible);
  EXPECT_LT(s.dual_bound, -1e-7);
}

TEST(Solve, MotzkinIsNotSos) {
  EXPECT_EQ(solve(sos_problem(motzkin_polynomial())).status, SdpStatus::Infeasible);
}

TEST(Solve, MotzkinTimesNormIsSos) {
  const auto p = sos_problem(motzkin_polynomial() * squared_norm_power(2, 1));
  const auto s = solve(p);
  ASSERT_EQ(s.status, SdpStatus::Feasible);
  EXPECT_GT(s.margin, 1e-6);
  expect_feasible_point(p, s);
}

TEST(Solve, VerdictsStableUnderConstraintOrder) {
  const auto mot = sos_problem(motzkin_polynomial());
  const auto r2mot = sos_problem(motzkin_polynomial() * squared_norm_power(2, 1));
  std::mt19937 rng(2024);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(solve(permuted(mot, rng)).status, SdpStatus::Infeasible) << "ordering " << t;
    EXPECT_EQ(solve(permuted(r2mot, rng)).status, SdpStatus::Feasible) << "ordering " << t;
  }
}

TEST(Solve, VerdictsStableUnderScaling) {
  std::vector<SdpProblem> problems{
      sos_problem(motzkin_polynomial()),
      sos_problem(motzkin_polynomial() * squared_norm_power(2, 1)),
      sos_problem(nonsos_positive_form()),
      lyapunov_problem(conservative_field(), 2, SearchMode::VSos),
      lyapunov_problem(conservative_field(), 4, SearchMode::VSos),
      lyapunov_problem(example_thc_field(), 6, SearchMode::ThcSos),
      lyapunov_problem(example_thc_field(), 8, SearchMode::ThcSos),
  };
  SolverSettings big;
  big.trace_cap *= 10.0;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto base = solve(problems[i]).status;
    EXPECT_NE(base, SdpStatus::Indeterminate) << i;
    EXPECT_EQ(solve(scaled(problems[i], 10.0), big).status, base) << i;
  }
}

TEST(Solve, FeasibleFreeVariables) {
  // Q + u = 2, u = 1.
  SdpProblem p;
  p.blocks = {1};
  p.n_free = 1;
  p.constraints.push_back({{{0, 0, 0, 1.0}}, {{0, 1.0}}, 2.0});
  p.constraints.push_back({{}, {{0, 1.0}}, 1.0});
  const auto s = solve(p);
  ASSERT_EQ(s.status, SdpStatus::Feasible);
  EXPECT_NEAR(s.free[0], 1.0, 1e-7);
  expect_feasible_point(p, s);
}

TEST(Solve, InconsistentEmptyRow) {
  SdpProblem p;
  p.blocks = {1};
  p.constraints.push_back({{}, {}, 1.0});
  EXPECT_EQ(solve(p).status, SdpStatus::Infeasible);
}

TEST(Solve, SingularFeasibleSetUsesFace) {
  // (x1 + x2)^2 only has the rank-one Gram matrix [[1,1],[1,1]].
  const auto p = sos_problem(parse_polynomial("x1^2+2*x1*x2+x2^2", 2));
  const auto s = solve(p);
  ASSERT_EQ(s.status, SdpStatus::Feasible);
  EXPECT_EQ(s.facial_reductions, 1);
  EXPECT_NEAR(s.blocks[0](0, 1), 1.0, 1e-6);
  expect_feasible_point(p, s);
}

TEST(Solve, DimensionCap) {
  SdpProblem p;
  p.blocks = {150, 60};
  EXPECT_THROW(solve(p), DimensionError);
}

TEST(Solve, MalformedProblemRejected) {
  SdpProblem p;
  p.blocks = {2};
  p.constraints.push_back({{{0, 1, 0, 1.0}}, {}, 1.0});
  EXPECT_THROW(solve(p), DimensionError);
}

TEST(Solve, Deterministic) {
  const auto p = lyapunov_problem(conservative_field(), 4, SearchMode::VSos);
  const auto a = solve(p), b = solve(p);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.margin, b.margin);
  EXPECT_EQ(a.free, b.free);
}

TEST(Solve, IterationLimitIsIndeterminateNotWrong) {
  SolverSettings s;
  s.max_iterations = 2;
  const auto r = solve(sos_problem(motzkin_polynomial() * squared_norm_power(2, 1)), s);
  EXPECT_NE(r.status, SdpStatus::Infeasible);
}

TEST(SolutionJson, RoundTrip) {
  const auto s = solve(scalar_problem(1.0));
  const nlohmann::json j = s;
  const auto back = j.get<SdpSolution>();
  EXPECT_EQ(back.status, s.status);
  EXPECT_EQ(back.margin, s.margin);
  ASSERT_EQ(back.blocks.size(), 1u);
  EXPECT_EQ(back.blocks[0](0, 0), s.blocks[0](0, 0));
  EXPECT_EQ(j.at("status"), "feasible");
}
