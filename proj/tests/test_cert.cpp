#include <gtest/gtest.h>

#include "soslyap/cert/verify.hpp"
#include "soslyap/cli/corpus.hpp"
#include "soslyap/lyap/power.hpp"
#include "soslyap/lyap/search.hpp"

using namespace soslyap;

namespace {

Polynomial P(const char* s, std::size_t n) { return parse_polynomial(s, n); }

LyapunovCertificate decay_certificate() {
  auto r = find_lyapunov(VectorField({P("-x1", 2), P("-x2", 2)}), 2, SearchMode::VSos);
  EXPECT_TRUE(r.feasible());
  return *r.certificate;
}

GramCertificate& gram(LyapunovCertificate& c, const std::string& label) {
  for (auto& g : c.grams)
    if (g.label == label) return g;
  throw std::runtime_error("no gram " + label);
}

bool has_reason(const VerificationReport& r, const std::string& needle) {
  for (const auto& s : r.reasons)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Verify, DecayCertificate) {
  const auto rep = verify_certificate(decay_certificate());
  EXPECT_TRUE(rep.verified());
  EXPECT_TRUE(rep.reasons.empty());
  ASSERT_EQ(rep.constraints.size(), 2u);
  EXPECT_EQ(rep.constraints[0].label, "V");
  EXPECT_EQ(rep.constraints[1].label, "-dV/dt");
  ASSERT_EQ(rep.samples.size(), 2u);
  EXPECT_EQ(rep.samples[0].count, 1000u);
}

TEST(Verify, PerturbedGramRejected) {
  auto c = decay_certificate();
  gram(c, "-dV/dt").gram(0, 0) += 1e-3;
  const auto rep = verify_certificate(c);
  EXPECT_FALSE(rep.verified());
  EXPECT_TRUE(has_reason(rep, "reconstruction error"));
}

TEST(Verify, PerturbedVRejected) {
  auto c = decay_certificate();
  c.v = c.v + P("0.001*x1*x2", 2);
  EXPECT_FALSE(verify_certificate(c).verified());
}

TEST(Verify, NegativeEigenvalueRejected) {
  auto c = decay_certificate();
  auto& g = gram(c, "V");
  g.gram(1, 1) = -0.5 * g.gram(0, 0);
  c.v = g.reconstruct();
  const auto rep = verify_certificate(c);
  EXPECT_FALSE(rep.verified());
  EXPECT_TRUE(has_reason(rep, "negative Gram eigenvalue"));
}

TEST(Verify, ExampleFieldDegreeEight) {
  const auto r = find_lyapunov(example_thc_field(), 8, SearchMode::ThcSos);
  ASSERT_TRUE(r.feasible());
  const auto rep = verify_certificate(*r.certificate);
  EXPECT_TRUE(rep.verified());
  ASSERT_EQ(rep.constraints.size(), 2u);
  EXPECT_EQ(rep.constraints[0].label, "thc(V)");
  for (const auto& c : rep.constraints) {
    EXPECT_GT(c.min_eigenvalue, 0.0);
    EXPECT_LE(c.reconstruction_error, 1e-6);
  }
  for (const auto& s : rep.samples) EXPECT_GE(s.min_value, 0.0) << s.name;
}

TEST(Verify, ConstantTermRejectedInThcMode) {
  auto c = *find_lyapunov(example_thc_field(), 8, SearchMode::ThcSos).certificate;
  c.v = c.v + Polynomial::constant(2, 1.0);
  EXPECT_TRUE(has_reason(verify_certificate(c), "constant term"));
}

TEST(Verify, MissingGramIsDomainError) {
  auto c = decay_certificate();
  c.grams.erase(c.grams.begin());
  EXPECT_THROW(verify_certificate(c), DomainError);
}

TEST(Verify, DimensionMismatch) {
  auto c = decay_certificate();
  c.system = Dynamics::continuous(VectorField({P("-x1", 3), P("-x2", 3), P("-x3", 3)}));
  EXPECT_THROW(verify_certificate(c), DimensionError);
}

TEST(Verify, DecreaseOnlyChecksOnlyDecrease) {
  LyapunovOptions opt;
  opt.decrease_only = true;
  Eigen::MatrixXd a(2, 2);
  a << -1.0, 2.0, 0.0, -1.0;
  const auto r = find_common_lyapunov({LinearSystem(a)}, 2, TimeModel::Continuous, opt);
  ASSERT_TRUE(r.feasible());
  const auto rep = verify_certificate(*r.certificate);
  EXPECT_TRUE(rep.verified());
  ASSERT_EQ(rep.constraints.size(), 1u);
  EXPECT_EQ(rep.constraints[0].label, "-dV/dt");
}

TEST(Verify, DiscreteCertificate) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.4, -0.3, 0.6;
  const auto r = find_common_lyapunov({LinearSystem(a)}, 4, TimeModel::Discrete);
  ASSERT_TRUE(r.feasible());
  const auto rep = verify_certificate(*r.certificate);
  EXPECT_TRUE(rep.verified());
  EXPECT_EQ(rep.constraints[1].label, "V-V(Ax)");
}

TEST(VerifyPower, IdentitiesHold) {
  const Polynomial v = nonsos_positive_form();
  const auto r = power_certificate(v, gradient_system(v));
  ASSERT_TRUE(r.feasible());
  const auto rep = verify_certificate(*r.certificate);
  EXPECT_TRUE(rep.verified());
  ASSERT_EQ(rep.identities.size(), 3u);
  for (const auto& i : rep.identities) {
    EXPECT_TRUE(i.holds) << i.name;
    EXPECT_LE(i.relative_error, 1e-10) << i.name;
  }
}

TEST(VerifyPower, WrongExponentRejected) {
  auto c = *power_certificate(P("x1^2+x2^2", 2), VectorField({P("-x1", 2), P("-x2", 2)})).certificate;
  c.k = 1;
  const auto rep = verify_certificate(c);
  EXPECT_FALSE(rep.verified());
  EXPECT_TRUE(has_reason(rep, "W == base^(2k+2)"));
}

TEST(VerifyPower, WrongBaseRejected) {
  auto c = *planar_power_certificate(P("x1^2+x2^2", 2), VectorField({P("-x1", 2), P("-x2", 2)})).certificate;
  c.base = c.v;
  EXPECT_TRUE(has_reason(verify_certificate(c), "base == V + 1"));
}

TEST(VerifyPower, MissingModeGram) {
  auto c = *power_certificate(P("x1^2+x2^2", 2), VectorField({P("-x1", 2), P("-x2", 2)})).certificate;
  c.decrease_grams.clear();
  EXPECT_THROW(verify_certificate(c), DomainError);
}

TEST(Sampling, RadicalInverse) {
  EXPECT_EQ(radical_inverse(1, 2), 0.5);
  EXPECT_EQ(radical_inverse(2, 2), 0.25);
  EXPECT_EQ(radical_inverse(3, 2), 0.75);
  EXPECT_NEAR(radical_inverse(1, 3), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(radical_inverse(3, 3), 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(radical_inverse(5, 3), 7.0 / 9.0, 1e-15);
}

TEST(Sampling, DeterministicAndWellFormed) {
  const auto a = verification_samples(3), b = verification_samples(3);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 1000u);
  for (std::size_t i = 0; i < 500; ++i) {
    double r = 0.0;
    for (double x : a[i]) r += x * x;
    EXPECT_NEAR(r, 1.0, 1e-12);
  }
  for (std::size_t i = 500; i < 1000; ++i)
    for (double x : a[i]) EXPECT_LE(std::abs(x), 3.0);
  EXPECT_THROW(halton_points(17, 1), DimensionError);
}

TEST(ReportJson, Fields) {
  const nlohmann::json j = verify_certificate(decay_certificate());
  EXPECT_EQ(j.at("verdict"), "verified");
  EXPECT_EQ(j.at("constraints").size(), 2u);
  EXPECT_TRUE(j.at("reasons").empty());
  EXPECT_EQ(j.at("tolerances").at("reconstruction"), 1e-6);
}

TEST(CertificateJson, VerdictSurvivesRoundTrip) {
  auto c = decay_certificate();
  const auto back = nlohmann::json(c).get<LyapunovCertificate>();
  EXPECT_TRUE(verify_certificate(back).verified());
  gram(c, "V").gram(0, 1) += 0.01;
  gram(c, "V").gram(1, 0) += 0.01;
  EXPECT_FALSE(verify_certificate(nlohmann::json(c).get<LyapunovCertificate>()).verified());
}
