#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "parablab/errors.hpp"
#include "parablab/flows.hpp"
#include "parablab/optimize.hpp"

using namespace parablab;

namespace {

Eigen::VectorXd random_p(std::mt19937_64& rng, int n, double lo, double hi) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ur(std::log(lo), std::log(hi));
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = nd(rng);
  return p.normalized() * std::exp(ur(rng));
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = nd(rng);
  return B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(McfGraph, FlatGraphIsIdentity) {
  const auto f = mcf_graph(3);
  EXPECT_LT((f.coeff(Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity()).norm(), 1e-15);
  EXPECT_THROW(mcf_graph(0), DomainError);
}

TEST(McfGraph, OneDimensionalReducesToCsf) {
  const auto f = mcf_graph(1);
  EXPECT_DOUBLE_EQ(f.coeff(Eigen::VectorXd::Constant(1, 1.0))(0, 0), 0.5);
  const auto c = csf();
  for (double p : {-3.0, 0.0, 0.4, 7.0})
    EXPECT_NEAR(f.coeff(Eigen::VectorXd::Constant(1, p))(0, 0), c.a(p, 0, 0, 0), 1e-15);
}

TEST(McfGraph, EigenvaluesAtThreeFour) {
  const Eigen::MatrixXd a = mcf_graph(2).coeff(Eigen::Vector2d(3, 4));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  EXPECT_NEAR(es.eigenvalues()[0], 1.0 / 26.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues()[1], 1.0, 1e-14);
}

TEST(Heat, CoefficientAndMetadata) {
  EXPECT_THROW(heat_1d(0.0), DomainError);
  EXPECT_DOUBLE_EQ(heat_1d(0.25).a(3.0, 1.0, 0.0, 0.0), 1.0);
  const auto h = heat_1d(1.0);
  EXPECT_DOUBLE_EQ(h.a(2.0, 0, 0, 0) * 4.0, 1.0);
  EXPECT_DOUBLE_EQ(h.A, h.P * h.P / 4.0);
  EXPECT_TRUE(check_metadata(h).passed);
}

TEST(Catalog, MetadataConsistent) {
  EXPECT_TRUE(check_metadata(csf()).passed);
  EXPECT_TRUE(check_metadata(plaplace_reg(1.0, 0.1)).passed);
  EXPECT_TRUE(check_metadata(plaplace_reg(3.0, 0.1), 50.0).passed);
  auto wrong = csf();
  wrong.A = 0.9;
  EXPECT_FALSE(check_metadata(wrong).passed);
}

TEST(Catalog, FluxIsAntiderivative) {
  for (const auto& f : {heat_1d(0.3), csf()}) {
    for (double p : {-4.0, -0.5, 0.0, 1.0, 10.0}) {
      const double h = 1e-5;
      EXPECT_NEAR((f.flux(p + h) - f.flux(p - h)) / (2 * h), f.a(p, 0, 0, 0), 1e-8);
    }
  }
}

TEST(Alpha, McfExampleAndIdentity) {
  const Eigen::Vector2d p(1, 0);
  EXPECT_NEAR(alpha(mcf_coefficients(p), p), 0.5, 1e-10);
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 5; ++i) {
      const Eigen::VectorXd q = random_p(rng, n, 0.1, 10);
      EXPECT_NEAR(alpha(Eigen::MatrixXd::Identity(n, n), q), 1.0, 1e-10);
    }
  }
  EXPECT_THROW(alpha(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()), DomainError);
}

TEST(Alpha, McfClosedForm) {
  std::mt19937_64 rng(4);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd p = random_p(rng, n, 0.1, 10);
      EXPECT_NEAR(alpha(mcf_coefficients(p), p), 1.0 / (1.0 + p.squaredNorm()), 1e-6);
    }
  }
}

TEST(Alpha, RandomSpdMatchesClosedForm) {
  std::mt19937_64 rng(6);
  for (int n = 2; n <= 3; ++n) {
    for (int i = 0; i < 20; ++i) {
      const Eigen::MatrixXd A = random_spd(rng, n);
      const Eigen::VectorXd p = random_p(rng, n, 0.5, 2);
      const double ref = alpha_closed_form(A, p);
      EXPECT_NEAR(alpha(A, p), ref, 1e-4 * std::max(1.0, ref));
    }
  }
}

TEST(Alpha, SpecialFormReturnsRadialCoefficient) {
  std::mt19937_64 rng(8);
  for (int n = 2; n <= 3; ++n) {
    const Eigen::VectorXd p = random_p(rng, n, 0.5, 5);
    const Eigen::VectorXd ph = p.normalized();
    const Eigen::MatrixXd proj = ph * ph.transpose();
    const double a_inf = 2.0, a0 = 0.3;
    const Eigen::MatrixXd A = a_inf * (Eigen::MatrixXd::Identity(n, n) - proj) + a0 * proj;
    EXPECT_NEAR(alpha(A, p), a0, 1e-8);
  }
}

TEST(Bernstein, BoundsAndExamples) {
  EXPECT_DOUBLE_EQ(bernstein_E(Eigen::Matrix2d::Identity(), Eigen::Vector2d(3, 4)), 25.0);
  const Eigen::Vector2d p(1, 0);
  EXPECT_NEAR(bernstein_E(mcf_coefficients(p), p), 0.5, 1e-15);
  EXPECT_EQ(bernstein_E(Eigen::Matrix2d::Random(), Eigen::Vector2d::Zero()), 0.0);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 30; ++i) {
    const Eigen::MatrixXd A = random_spd(rng, 3);
    const Eigen::VectorXd q = random_p(rng, 3, 0.2, 3);
    const double ratio = bernstein_E(A, q) / q.squaredNorm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    EXPECT_GE(ratio, alpha(A, q) - 1e-8);
    EXPECT_LE(ratio, es.eigenvalues().maxCoeff() + 1e-12);
  }
}

TEST(Degeneracy, McfPassesHeatPassesExponentialFails) {
  const auto s = linspace(1.0, 100.0, 500);
  EXPECT_TRUE(check_degeneracy(mcf_profile(), s).passed);
  EXPECT_TRUE(check_degeneracy(heat_profile(2.0), s).passed);
  const auto r = check_degeneracy({[](double x) { return std::exp(-x); }, 0.1, 1.0}, s);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.witness.point[0], 5.0);
  EXPECT_THROW(check_degeneracy(mcf_profile(), {}), DomainError);
}

TEST(Degeneracy, NegativeExponentProfileFails) {
  const auto f = plaplace_reg(-1.0, 0.1);
  DegeneracyProfile prof{[&](double s) { return f.a(s, 0, 0, 0); }, f.A, f.P};
  EXPECT_FALSE(check_degeneracy(prof, logspace(1.0, 1e3, 200)).passed);
}

TEST(Optimize, NelderMeadAndGolden) {
  const auto m = nelder_mead(
      [](const Eigen::VectorXd& x) { return std::pow(x[0] - 1, 2) + 10 * std::pow(x[1] + 2, 2); },
      Eigen::Vector2d(0, 0), {0.5, 1e-10, 1e-20, 5000});
  EXPECT_NEAR(m.x[0], 1.0, 1e-6);
  EXPECT_NEAR(m.x[1], -2.0, 1e-6);
  EXPECT_NEAR(golden_section_min([](double x) { return std::cosh(x - 0.3); }, -2, 2), 0.3, 1e-6);
  const Eigen::MatrixXd d = sphere_directions(3, 100);
  for (int k = 0; k < 100; ++k) EXPECT_NEAR(d.col(k).norm(), 1.0, 1e-14);
}
