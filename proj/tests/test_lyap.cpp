#include <gtest/gtest.h>

#include <random>

#include "soslyap/cert/verify.hpp"
#include "soslyap/cli/corpus.hpp"
#include "soslyap/lyap/power.hpp"
#include "soslyap/lyap/search.hpp"

using namespace soslyap;

namespace {

Polynomial P(const char* s, std::size_t n) { return parse_polynomial(s, n); }

VectorField negative_identity(std::size_t n) {
  std::vector<Polynomial> f;
  for (std::size_t i = 0; i < n; ++i) f.push_back(-1.0 * Polynomial::variable(n, i));
  return VectorField(std::move(f));
}

// V proportional to `expected`: ratio of coefficients is constant and positive.
void expect_proportional(const Polynomial& v, const Polynomial& expected) {
  ASSERT_EQ(v.size(), expected.size()) << to_string(v);
  const auto& [m0, c0] = *expected.terms().begin();
  const double ratio = v.coefficient(m0) / c0;
  EXPECT_GT(ratio, 0.0);
  for (const auto& [m, c] : expected.terms()) EXPECT_NEAR(v.coefficient(m) / ratio, c, 1e-6 * std::abs(c)) << to_string(v);
}

// A homogeneous quintic field with -<grad V, f> = L for
// V = 0.01 (x1^2 + x2^2) + x3^2 and L a perturbed homogenized Motzkin form.
// Its minimal power-certificate k is 1, not 0.
std::pair<Polynomial, VectorField> delayed_power_instance() {
  const Polynomial v = 0.01 * P("x1^2+x2^2", 3) + P("x3^2", 3);
  const Polynomial l = P("x1^4*x2^2+x1^2*x2^4-3*x1^2*x2^2*x3^2+x3^6", 3) + 1e-3 * squared_norm_power(3, 3);
  const std::vector<double> w{0.01, 0.01, 1.0};
  std::vector<Polynomial> f(3, Polynomial(3));
  for (const auto& [m, c] : l.terms())
    for (std::size_t i = 3; i-- > 0;)
      if (m[i] > 0) {
        std::vector<int> e(m.exponents().begin(), m.exponents().end());
        --e[i];
        f[i].add_term(Monomial(e), -c / (2.0 * w[i]));
        break;
      }
  return {v, VectorField(std::move(f))};
}

Eigen::MatrixXd random_matrix(std::mt19937& rng, std::size_t n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a;
}

}  // namespace

TEST(CheckSos, PerfectSquare) {
  const auto r = check_sos(P("x1^2+2*x1*x2+x2^2", 2));
  ASSERT_TRUE(r.feasible());
  ASSERT_TRUE(r.certificate);
  const auto& g = *r.certificate;
  ASSERT_EQ(g.basis.size(), 2u);
  EXPECT_LT((g.gram - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(max_abs_difference(g.reconstruct(), P("x1^2+2*x1*x2+x2^2", 2)), 1e-7);
}

TEST(CheckSos, MotzkinIsNotSos) {
  const auto r = check_sos(motzkin_polynomial());
  EXPECT_EQ(r.status, SdpStatus::Infeasible);
  EXPECT_FALSE(r.certificate);
}

TEST(CheckSos, PositiveTernarySexticIsNotSos) {
  EXPECT_EQ(check_sos(nonsos_positive_form(), true).status, SdpStatus::Infeasible);
}

TEST(CheckSos, OddDegreeIsStructural) {
  const auto r = check_sos(P("x1^3+x2^2", 2));
  EXPECT_EQ(r.status, SdpStatus::Infeasible);
  EXPECT_NE(r.note.find("odd degree"), std::string::npos);
}

TEST(CheckSos, ZeroPolynomial) {
  EXPECT_TRUE(check_sos(Polynomial(2)).feasible());
  EXPECT_EQ(check_sos(Polynomial(2), false, {}, 1e-4).status, SdpStatus::Infeasible);
}

TEST(CheckSos, ScaleDoesNotChangeVerdict) {
  const Polynomial r2m = motzkin_polynomial() * squared_norm_power(2, 1);
  for (double s : {1e-2, 1.0, 1e3, 1e6}) {
    EXPECT_TRUE(check_sos(s * r2m).feasible()) << s;
    EXPECT_EQ(check_sos(s * motzkin_polynomial()).status, SdpStatus::Infeasible) << s;
  }
}

TEST(CheckSos, EpsilonRequiresDefiniteness) {
  EXPECT_TRUE(check_sos(P("x1^2+x2^2", 2), true, {}, 1e-4).feasible());
  EXPECT_EQ(check_sos(P("x1^2", 2), true, {}, 1e-4).status, SdpStatus::Infeasible);
}

TEST(FindLyapunov, ScalarDecay) {
  const auto r = find_lyapunov(VectorField({P("-x1", 1)}), 2, SearchMode::VSos);
  ASSERT_TRUE(r.feasible());
  expect_proportional(r.certificate->v, P("x1^2", 1));
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
}

TEST(FindLyapunov, ExampleFieldNeedsDegreeEight) {
  const Dynamics sys = Dynamics::continuous(example_thc_field());
  const auto sweep = sweep_degrees(sys, 10, SearchMode::ThcSos);
  ASSERT_EQ(sweep.size(), 4u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(sweep[static_cast<std::size_t>(i)].status, SdpStatus::Infeasible) << 2 * i + 2;
  ASSERT_TRUE(sweep[3].feasible());
  const auto& cert = *sweep[3].certificate;
  EXPECT_EQ(cert.v.constant_term(), 0.0);
  EXPECT_EQ(cert.v.degree(), 8);
  const auto rep = verify_certificate(cert);
  EXPECT_TRUE(rep.verified());
  for (const auto& c : rep.constraints) EXPECT_GT(c.min_eigenvalue, 0.0) << c.label;
}

TEST(FindLyapunov, ExampleFieldDegreeMonotone) {
  EXPECT_TRUE(find_lyapunov(example_thc_field(), 10, SearchMode::ThcSos).feasible());
}

TEST(FindLyapunov, ConservativeFieldNeedsDegreeFour) {
  EXPECT_EQ(find_lyapunov(conservative_field(), 2, SearchMode::VSos).status, SdpStatus::Infeasible);
  const auto r4 = find_lyapunov(conservative_field(), 4, SearchMode::VSos);
  ASSERT_TRUE(r4.feasible());
  EXPECT_TRUE(verify_certificate(*r4.certificate).verified());
  EXPECT_TRUE(find_lyapunov(conservative_field(), 6, SearchMode::VSos).feasible());
}

TEST(FindLyapunov, BadInputs) {
  EXPECT_THROW(find_lyapunov(VectorField({P("-x1 + 1", 1)}), 2, SearchMode::VSos), DomainError);
  EXPECT_THROW(find_lyapunov(VectorField({P("-x1", 1)}), 3, SearchMode::VSos), DomainError);
  EXPECT_THROW(find_lyapunov(VectorField({P("-x1", 1)}), 0, SearchMode::VSos), DomainError);
}

TEST(FindLyapunov, UnstableSystemInfeasible) {
  EXPECT_EQ(find_lyapunov(VectorField({P("x1", 1)}), 2, SearchMode::VSos).status, SdpStatus::Infeasible);
}

TEST(FindLyapunov, HomogeneousTemplateForHomogeneousSystems) {
  const auto prog = lyapunov_program(Dynamics::continuous(negative_identity(2)), 4, SearchMode::VSos);
  for (const auto& m : prog.v_template.basis()) EXPECT_EQ(m.degree(), 4);
  LyapunovOptions full;
  full.homogeneous_template = false;
  const auto prog_full = lyapunov_program(Dynamics::continuous(negative_identity(2)), 4, SearchMode::VSos, full);
  EXPECT_EQ(prog_full.v_template.size(), monomials_in_degree_range(2, 1, 4).size());
  EXPECT_FALSE(prog_full.v_template.has_constant_term());
}

TEST(CommonLyapunov, NegativeIdentity) {
  const auto r = find_common_lyapunov({LinearSystem(-Eigen::MatrixXd::Identity(3, 3))}, 2, TimeModel::Continuous);
  ASSERT_TRUE(r.feasible());
  expect_proportional(r.certificate->v, P("x1^2+x2^2+x3^2", 3));
}

TEST(CommonLyapunov, PairSharingAQuadratic) {
  Eigen::MatrixXd p;
  const auto family = hurwitz_family_with_common_quadratic(2, 2, 3, &p);
  ASSERT_EQ(family.size(), 2u);
  for (const auto& a : family) {
    // Oracle: A^T P + P A is negative definite for the constructed P.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.matrix().transpose() * p + p * a.matrix());
    EXPECT_LT(es.eigenvalues().maxCoeff(), 0.0);
  }
  const auto r = find_common_lyapunov(family, 2, TimeModel::Continuous);
  ASSERT_TRUE(r.feasible());
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
}

TEST(CommonLyapunov, UnstablePairInfeasible) {
  for (int d : {2, 4}) EXPECT_EQ(find_common_lyapunov(unstable_pair(), d, TimeModel::Continuous).status, SdpStatus::Infeasible) << d;
}

TEST(CommonLyapunov, DiscreteTime) {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0.5, 0.2, 0.0, 0.4;
  b << 0.3, 0.0, -0.2, 0.6;
  const auto r = find_common_lyapunov({LinearSystem(a), LinearSystem(b)}, 2, TimeModel::Discrete);
  ASSERT_TRUE(r.feasible());
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
  Eigen::MatrixXd grow = 1.1 * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(find_common_lyapunov({LinearSystem(grow)}, 2, TimeModel::Discrete).status, SdpStatus::Infeasible);
}

TEST(CommonLyapunov, Errors) {
  EXPECT_THROW(find_common_lyapunov(std::vector<LinearSystem>{}, 2, TimeModel::Continuous), DimensionError);
  EXPECT_THROW(find_common_lyapunov({LinearSystem(-Eigen::MatrixXd::Identity(2, 2)),
                                     LinearSystem(-Eigen::MatrixXd::Identity(3, 3))},
                                    2, TimeModel::Continuous),
               DimensionError);
  const Dynamics mixed = Dynamics::continuous(std::vector<VectorField>{negative_identity(1), VectorField({P("-x1-x1^3", 1)})});
  EXPECT_THROW(find_common_lyapunov(mixed, 2), DomainError);
}

TEST(CommonLyapunov, NonlinearHomogeneousModes) {
  const Dynamics sys = Dynamics::continuous(
      std::vector<VectorField>{negative_identity(2), VectorField({P("-x1^3", 2), P("-x2^3", 2)})});
  const auto r = find_common_lyapunov(sys, 2);
  ASSERT_TRUE(r.feasible());
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
}

TEST(PowerCertificate, QuadraticDecay) {
  const auto r = power_certificate(P("x1^2+x2^2", 2), negative_identity(2));
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.certificate->k, 0);
  EXPECT_EQ(r.certificate->w, P("x1^4+2*x1^2*x2^2+x2^4", 2));
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
}

TEST(PowerCertificate, NonSosGradientSystem) {
  const Polynomial v = nonsos_positive_form();
  const auto r = power_certificate(v, gradient_system(v));
  ASSERT_TRUE(r.feasible());
  const auto& c = *r.certificate;
  EXPECT_EQ(r.steps.size(), static_cast<std::size_t>(c.k + 1));
  EXPECT_EQ(check_sos(v, true).status, SdpStatus::Infeasible);
  EXPECT_TRUE(check_sos(c.w, true).feasible());
  EXPECT_TRUE(verify_certificate(c).verified());
}

TEST(PowerCertificate, IdentityHoldsExactly) {
  const Polynomial v = P("x1^2+x1*x2+x2^2", 2);
  const VectorField f({P("-x1^3-x2^3", 2), P("x1^3-x2^3", 2)});
  const auto r = power_certificate(v, f);
  ASSERT_TRUE(r.feasible());
  const auto& c = *r.certificate;
  const auto e = static_cast<unsigned>(2 * c.k + 2);
  EXPECT_EQ(c.w, pow(v, e));
  const Polynomial lhs = -lie_derivative(c.w, f);
  const Polynomial rhs = (2.0 * c.k + 2.0) * pow(v, e - 1) * (-lie_derivative(v, f));
  EXPECT_LE(max_abs_difference(lhs, rhs), 1e-10 * std::max(1.0, lhs.max_abs_coefficient()));
}

TEST(PowerCertificate, Errors) {
  EXPECT_THROW(power_certificate(P("x1^2+x1", 1), VectorField({P("-x1", 1)})), DomainError);
  EXPECT_THROW(power_certificate(P("x1^2", 1), VectorField({P("-x1-x1^3", 1)})), DomainError);
  EXPECT_THROW(power_certificate(P("x1^2", 1), VectorField({P("x1", 1)})), DomainError);
}

TEST(PlanarPowerCertificate, QuadraticDecay) {
  const auto r = planar_power_certificate(P("x1^2+x2^2", 2), negative_identity(2));
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.certificate->k, 0);
  EXPECT_EQ(r.certificate->w, pow(P("x1^2+x2^2+1", 2), 2));
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
}

TEST(PlanarPowerCertificate, ConservativeField) {
  const auto r = planar_power_certificate(P("0.5*x1^2+0.5*x2^2", 2), conservative_field());
  ASSERT_TRUE(r.feasible());
  const auto& c = *r.certificate;
  EXPECT_LE(c.k, 5);
  EXPECT_EQ(c.w, pow(P("0.5*x1^2+0.5*x2^2+1", 2), static_cast<unsigned>(2 * c.k + 2)));
  EXPECT_TRUE(c.decrease_grams[0].homogenized);
  // The trivariate certificate restricts to -dW/dt at y = 1.
  EXPECT_LT(max_abs_difference(c.decrease_grams[0].reconstruct(), -lie_derivative(c.w, conservative_field())),
            1e-6);
  EXPECT_TRUE(verify_certificate(c).verified());
}

TEST(PlanarPowerCertificate, PreconditionViolations) {
  EXPECT_THROW(planar_power_certificate(P("x1^4+x1^2*x2^2", 2), negative_identity(2)), DomainError);
  EXPECT_THROW(planar_power_certificate(P("x1^2", 1), VectorField({P("-x1", 1)})), DimensionError);
}

TEST(CommonPowerCertificate, SingleModeMatchesPowerCertificate) {
  const Polynomial v = P("x1^2+x2^2", 2);
  const auto a = common_power_certificate(v, {negative_identity(2)});
  const auto b = power_certificate(v, negative_identity(2));
  ASSERT_TRUE(a.feasible() && b.feasible());
  EXPECT_EQ(a.certificate->k, b.certificate->k);
  EXPECT_EQ(a.certificate->w, b.certificate->w);
}

TEST(CommonPowerCertificate, TwoTrivialModes) {
  const auto r = common_power_certificate(P("x1^2+x2^2", 2),
                                          {negative_identity(2), VectorField({P("-x1-x2", 2), P("x1-x2", 2)})});
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.certificate->k, 0);
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
}

TEST(CommonPowerCertificate, DistinctMinimalK) {
  const auto [v, f] = delayed_power_instance();
  EXPECT_LT(max_abs_difference(-lie_derivative(v, f),
                               P("x1^4*x2^2+x1^2*x2^4-3*x1^2*x2^2*x3^2+x3^6", 3) + 1e-3 * squared_norm_power(3, 3)),
            1e-12);
  const auto single = power_certificate(v, f);
  ASSERT_TRUE(single.feasible());
  const int k2 = single.certificate->k;
  EXPECT_GE(k2, 1);
  const auto r = common_power_certificate(v, {negative_identity(3), f});
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.certificate->mode_k, (std::vector<int>{0, k2}));
  EXPECT_EQ(r.certificate->k, std::max(0, k2));
  EXPECT_TRUE(verify_certificate(*r.certificate).verified());
}

TEST(SquareLyapunov, Examples) {
  EXPECT_EQ(square_lyapunov(P("x1", 1)), P("x1^2", 1));
  EXPECT_EQ(square_lyapunov(P("x1^2+x2^2+1", 2)), pow(P("x1^2+x2^2+1", 2), 2));
}

TEST(SquareLyapunov, AlwaysSos) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    Polynomial v(2);
    for (const auto& m : monomials_in_degree_range(2, 0, 3)) v.add_term(m, c(rng));
    const Polynomial w = square_lyapunov(v);
    EXPECT_TRUE(check_sos(w).feasible()) << to_string(v);
    const GramCertificate g = square_gram("W", v);
    EXPECT_LT(max_abs_difference(g.reconstruct(), w), 1e-9);
  }
}

TEST(GradientSystem, Examples) {
  const auto f = gradient_system(P("x1^2", 1));
  EXPECT_EQ(f[0], P("-2*x1", 1));
  EXPECT_THROW(gradient_system(Polynomial::constant(2, 3.0)), DomainError);
}

TEST(GradientSystem, NonSosVWithSosDecrease) {
  const Polynomial v = nonsos_positive_form();
  const VectorField f = gradient_system(v);
  const Polynomial vdot_neg = -lie_derivative(v, f);
  EXPECT_LT(max_abs_difference(vdot_neg, gradient_norm_squared(v)), 1e-12);
  EXPECT_EQ(check_sos(v, true).status, SdpStatus::Infeasible);
  EXPECT_TRUE(check_sos(vdot_neg, true).feasible());
  // Euler: V(x) > 0 forces grad V(x) != 0.
  for (const auto& x : verification_samples(3)) {
    if (v.evaluate(x) > 0.0) {
      EXPECT_GT(vdot_neg.evaluate(x), 0.0);
    }
  }
}

TEST(TopComponent, SosImpliesTopComponentSos) {
  std::mt19937 rng(41);
  std::normal_distribution<double> g;
  int tested = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 2);
    const int half = 1 + t % 2;
    const auto basis = monomial_basis(n, half, false);
    const auto k = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd l(k, 2);
    for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = g(rng);
    const Polynomial p = gram_polynomial(n, basis, l * l.transpose());
    const auto r = check_sos(p);
    ASSERT_TRUE(r.feasible()) << to_string(p);
    ++tested;
    const Polynomial thc = top_homogeneous_component(p);
    EXPECT_TRUE(check_sos(thc, true).feasible()) << to_string(thc);
  }
  EXPECT_EQ(tested, 200);
  // The converse fails: the top component of the Motzkin polynomial is sos.
  EXPECT_TRUE(check_sos(top_homogeneous_component(motzkin_polynomial()), true).feasible());
  EXPECT_EQ(check_sos(motzkin_polynomial()).status, SdpStatus::Infeasible);
}

TEST(DecreaseOnly, DiscreteDecreaseImpliesSos) {
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> radius(0.3, 0.9);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 2);
    Eigen::MatrixXd a = random_matrix(rng, n);
    a *= radius(rng) / Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues().cwiseAbs().maxCoeff();
    LyapunovOptions opt;
    opt.decrease_only = true;
    for (int d : {2, 4, 6}) {
      const auto r = find_common_lyapunov({LinearSystem(a)}, d, TimeModel::Discrete, opt);
      if (!r.feasible()) continue;
      EXPECT_TRUE(check_sos(r.certificate->v, true).feasible()) << "instance " << t << " degree " << d;
    }
  }
}

TEST(DecreaseOnly, ContinuousDecreaseImpliesSos) {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> shift(0.1, 1.0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 2);
    Eigen::MatrixXd a = random_matrix(rng, n);
    const double re = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues().real().maxCoeff();
    a -= (re + shift(rng)) * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    LyapunovOptions opt;
    opt.decrease_only = true;
    for (int d : {2, 4, 6}) {
      const auto r = find_common_lyapunov({LinearSystem(a)}, d, TimeModel::Continuous, opt);
      if (!r.feasible()) continue;
      EXPECT_TRUE(check_sos(r.certificate->v, true).feasible()) << "instance " << t << " degree " << d;
    }
  }
}

TEST(CertificateJson, RoundTrip) {
  const auto r = find_lyapunov(conservative_field(), 4, SearchMode::VSos);
  ASSERT_TRUE(r.feasible());
  const nlohmann::json j = *r.certificate;
  const auto back = j.get<LyapunovCertificate>();
  EXPECT_EQ(back.v, r.certificate->v);
  EXPECT_EQ(back.grams.size(), r.certificate->grams.size());
  EXPECT_TRUE(verify_certificate(back).verified());

  const auto pw = power_certificate(P("x1^2+x2^2", 2), negative_identity(2));
  const nlohmann::json pj = *pw.certificate;
  EXPECT_EQ(pj.at("kind"), "power");
  EXPECT_TRUE(verify_certificate(pj.get<PowerCertificate>()).verified());
}
