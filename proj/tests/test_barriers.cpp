#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "parablab/barriers.hpp"
#include "parablab/errors.hpp"
#include "parablab/fields.hpp"

using namespace parablab;

namespace {

double fd1(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}
double fd2(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}

}  // namespace

TEST(HeatKernel, RejectsNonPositive) {
  EXPECT_THROW(HeatKernel(0.0), DomainError);
  EXPECT_THROW(phi_eval(HeatKernel(1.0), 0.2, 0.0), DomainError);
}

TEST(HeatKernel, OddDerivativeVanishesAtOrigin) {
  HeatKernel k(0.7);
  EXPECT_EQ(phi_eval(k, 0.0, 0.3, KernelDerivative::y), 0.0);
  EXPECT_GT(phi_eval(k, 2.0, 0.3), 0.0);
}

TEST(HeatKernel, SatisfiesHeatEquation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uy(-3, 3), ut(0.05, 3), uc(0.1, 5);
  for (int i = 0; i < 200; ++i) {
    HeatKernel k(uc(rng));
    const double y = uy(rng), t = ut(rng);
    const double lhs = phi_eval(k, y, t, KernelDerivative::yy);
    const double rhs = 4 * k.c() * phi_eval(k, y, t, KernelDerivative::t);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(lhs)));
  }
}

TEST(HeatKernel, ClosedFormsMatchFiniteDifferences) {
  HeatKernel k(1.0);
  const double y = 0.7, t = 0.3, h = 1e-4;
  auto in_y = [&](KernelDerivative d) { return [&, d](double s) { return phi_eval(k, s, t, d); }; };
  const auto value = KernelDerivative::value;
  EXPECT_NEAR(phi_eval(k, y, t, KernelDerivative::y), fd1(in_y(value), y, h), 1e-6);
  EXPECT_NEAR(phi_eval(k, y, t, KernelDerivative::yy), fd2(in_y(value), y, h), 1e-6);
  EXPECT_NEAR(phi_eval(k, y, t, KernelDerivative::yyy), fd1(in_y(KernelDerivative::yy), y, h), 1e-6);
  EXPECT_NEAR(phi_eval(k, y, t, KernelDerivative::t),
              fd1([&](double s) { return phi_eval(k, y, s); }, t, h), 1e-6);
  EXPECT_NEAR(phi_eval(k, y, t), std::exp(-y * y / t) / std::sqrt(t), 1e-15);
}

TEST(Psi, ZeroAndOddness) {
  PsiBarrier b(1.0);
  for (double t : {1e-3, 0.1, 1.0, 10.0}) EXPECT_EQ(psi_eval(b, 0.0, t), 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uf(-0.99, 0.99), ut(0.01, 4);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng);
    const double z = uf(rng) * b.z_limit(t);
    EXPECT_EQ(psi_eval(b, -z, t), -psi_eval(b, z, t));
  }
}

TEST(Psi, BackSubstitution) {
  PsiBarrier b(1.0);
  const double z = 0.5, t = 0.1;
  const double psi = psi_eval(b, z, t);
  const HeatKernel k(1.0);
  const double residual = z - (phi_eval(k, psi - 1, t) - phi_eval(k, psi + 1, t));
  EXPECT_LT(std::abs(residual), 1e-10);
  EXPECT_GT(psi, 0.0);
  EXPECT_LT(psi, 1.0);
}

TEST(Psi, ResidualWithinRootTolerance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uf(-0.999, 0.999), ut(1e-3, 5);
  for (double c : {0.25, 1.0, 4.0}) {
    PsiBarrier b(c);
    HeatKernel k(c);
    for (int i = 0; i < 200; ++i) {
      const double t = ut(rng);
      const double z = uf(rng) * b.z_limit(t);
      const double psi = psi_eval(b, z, t);
      const double r = z - (phi_eval(k, psi - 1, t) - phi_eval(k, psi + 1, t));
      EXPECT_LE(std::abs(r), b.root_tol() * (1 + std::abs(z)));
    }
  }
}

TEST(Psi, OutOfRangeThrowsOrClamps) {
  PsiBarrier b(1.0);
  const double t = 0.2;
  EXPECT_THROW(psi_eval(b, 1.01 * b.z_limit(t), t), RangeError);
  const auto cl = psi_eval_clamped(b, -2 * b.z_limit(t), t);
  EXPECT_TRUE(cl.clamped);
  EXPECT_EQ(cl.value, -1.0);
  EXPECT_FALSE(psi_eval_clamped(b, 0.3 * b.z_limit(t), t).clamped);
}

TEST(Psi, MonotoneAndSatisfiesPde) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uf(-0.95, 0.95), ut(0.02, 3);
  for (double c : {0.25, 1.0, 4.0}) {
    PsiBarrier b(c);
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng);
      const double z = uf(rng) * b.z_limit(t);
      const PsiDerivatives d = psi_derivs(b, z, t);
      EXPECT_GT(d.d1, 0.0);
      const double rhs = d.d2 / (4 * c * d.d1 * d.d1);
      EXPECT_LT(std::abs(d.dt - rhs), 1e-8 * (1 + std::abs(d.dt)));
    }
  }
}

TEST(Psi, DerivativesMatchFiniteDifferences) {
  PsiBarrier b(1.0);
  for (double t : {0.3, 0.5, 1.0}) {
    for (double f : {-0.6, -0.2, 0.1, 0.4, 0.7}) {
      const double z = f * b.z_limit(t);
      const PsiDerivatives d = psi_derivs(b, z, t);
      auto in_z = [&](double s) { return psi_eval(b, s, t); };
      const double h = 1e-4;
      EXPECT_NEAR(d.d1, fd1(in_z, z, h), 1e-5 * (1 + std::abs(d.d1)));
      EXPECT_NEAR(d.d2, fd2(in_z, z, h), 1e-5 * (1 + std::abs(d.d2)));
      EXPECT_NEAR(d.d3, fd1([&](double s) { return psi_derivs(b, s, t).d2; }, z, h),
                  1e-5 * (1 + std::abs(d.d3)));
      EXPECT_NEAR(d.dt, fd1([&](double s) { return psi_eval(b, z, s); }, t, 1e-5),
                  1e-5 * (1 + std::abs(d.dt)));
    }
  }
}

TEST(Psi, SlopeAtOriginClosedForm) {
  for (double c : {0.25, 1.0}) {
    PsiBarrier b(c);
    for (double t : {0.05, 0.2, 1.0}) {
      const double expected = std::pow(t, 1.5) / (4 * c) * std::exp(c / t);
      EXPECT_NEAR(psi_derivs(b, 0.0, t).d1, expected, 1e-12 * expected);
    }
  }
}

TEST(Psi, ApproachesSignAsTimeVanishes) {
  PsiBarrier b(1.0);
  for (double z : {0.1, 0.5, 2.0, 50.0}) {
    double prev = 0.0;
    for (double t : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
      const double v = psi_eval_clamped(b, z, t).value;
      EXPECT_GE(v, prev);
      EXPECT_EQ(psi_eval_clamped(b, -z, t).value, -v);
      prev = v;
    }
    EXPECT_GT(psi_eval_clamped(b, z, 1e-4).value, 0.97);
    EXPECT_FALSE(psi_eval_clamped(b, z, 1e-4).clamped);
    EXPECT_GT(prev, 0.999);
  }
}

TEST(ZM, VanishesAsTimeVanishes) {
  EXPECT_LT(z_M(1e-3, 1.0, 1.0), 1e-100);
  EXPECT_GT(z_M(1.0, 1.0, 1.0), 0.0);
}

TEST(ZM, ScaledBarrierReachesHeight) {
  const double M = 1.0, c = 1.0, t = 1.0;
  ScaledPsi phi(M, c);
  EXPECT_NEAR(phi.value(z_M(t, M, c), t), M, 1e-8);
  for (double Mb : {0.5, 2.0, 3.0}) {
    for (double tt : {0.3, 2.0, 8.0}) {
      ScaledPsi p(Mb, 0.7);
      EXPECT_NEAR(p.value(z_M(tt, Mb, 0.7), tt), Mb, 1e-8 * Mb);
    }
  }
}

TEST(ZM, ScalingIdentity) {
  for (double M : {0.5, 2.0, 4.0}) {
    for (double t : {0.1, 1.0, 5.0}) {
      EXPECT_NEAR(z_M(t, M, 1.3), M * z_M(t / (M * M), 1.0, 1.3), 1e-12 * z_M(t, M, 1.3));
    }
  }
}

TEST(ScaledPsi, SlopeEqualsPsiSlope) {
  ScaledPsi phi(2.0, 0.5);
  const double z = 0.3, t = 0.8;
  const double h = 1e-5;
  EXPECT_NEAR(phi.slope(z, t), (phi.value(z + h, t) - phi.value(z - h, t)) / (2 * h), 1e-6);
  EXPECT_TRUE(std::isinf(phi.slope(1e6, t)));
}

TEST(Cone, ApexValue) {
  ConeBarrier cb{1.5, 0.2, 0.8, 0.01};
  const double t = 0.3;
  EXPECT_NEAR(cone_barrier_eval(cb, 0.2, t),
              2 * 1.5 * std::sqrt(0.8 * (t + 0.01) / std::numbers::pi), 1e-14);
}

TEST(Cone, DominatesCone) {
  ConeBarrier cb{2.0, -0.3, 1.0, 0.0};
  for (double t : {1e-6, 1e-3, 0.1, 1.0}) {
    for (double x = -3; x <= 3; x += 0.01) {
      EXPECT_GE(cone_barrier_eval(cb, x, t), 2.0 * std::abs(x + 0.3) - 1e-14);
    }
  }
  EXPECT_THROW(cone_barrier_eval(cb, 0.0, 0.0), DomainError);
}

TEST(Cone, HeatResidualFourthOrderStencils) {
  ConeBarrier cb{1.3, 0.1, 0.5, 0.02};
  const double c = 1.0 / (4 * cb.Lambda);
  const double h = 2e-3, k = 1e-4;
  for (double x : {-0.5, -0.1, 0.1, 0.12, 0.6}) {
    for (double t : {0.05, 0.3, 1.0}) {
      auto v = [&](double xx, double tt) { return cone_barrier_eval(cb, xx, tt); };
      const double vt = (-v(x, t + 2 * k) + 8 * v(x, t + k) - 8 * v(x, t - k) + v(x, t - 2 * k)) / (12 * k);
      const double vxx = (-v(x + 2 * h, t) + 16 * v(x + h, t) - 30 * v(x, t) + 16 * v(x - h, t) -
                          v(x - 2 * h, t)) / (12 * h * h);
      EXPECT_LT(std::abs(vt - vxx / (4 * c)), 1e-8);
    }
  }
}

TEST(Cone, HeatResidualSecondOrder) {
  ConeBarrier cb{1.0, 0.0, 0.5, 0.0};
  const double c = 1.0 / (4 * cb.Lambda);
  auto residual = [&](double h) {
    double r = 0;
    for (double x : {-0.4, -0.1, 0.05, 0.3}) {
      for (double t : {0.1, 0.4}) {
        const double vt = fd1([&](double s) { return cone_barrier_eval(cb, x, s); }, t, h);
        const double vxx = fd2([&](double s) { return cone_barrier_eval(cb, s, t); }, x, h);
        r = std::max(r, std::abs(vt - vxx / (4 * c)));
      }
    }
    return r;
  };
  EXPECT_LT(residual(1e-3), 1e-4);
  EXPECT_GT(residual(2e-3) / residual(1e-3), 3.0);
}

TEST(Sphere, RadiusAndExtinction) {
  SphereBarrier s1{Eigen::VectorXd::Zero(1), 0.0, 1.0, 1};
  EXPECT_THROW(s1.radius(0.5), DomainError);
  EXPECT_DOUBLE_EQ(s1.extinction_time(), 0.5);
  SphereBarrier s2{Eigen::VectorXd::Zero(2), 0.0, 2.0, 2};
  EXPECT_NEAR(s2.radius(0.25), std::sqrt(3.0), 1e-15);
  EXPECT_THROW(sphere_eval(s2, Eigen::Vector2d(3, 0), 0.0), DomainError);
}

TEST(Sphere, CapTimeDerivative) {
  SphereBarrier sb{Eigen::Vector2d(0.1, -0.2), 1.0, 1.0, 2};
  const Eigen::Vector2d x(0.3, 0.1);
  const double t = 0.1;
  const double fd = (sphere_eval(sb, x, t + 1e-6) - sphere_eval(sb, x, t - 1e-6)) / 2e-6;
  EXPECT_NEAR(sphere_time_derivative(sb, x, t), fd, 1e-6);
  sb.orientation = CapOrientation::lower;
  EXPECT_NEAR(sphere_time_derivative(sb, x, t),
              (sphere_eval(sb, x, t + 1e-6) - sphere_eval(sb, x, t - 1e-6)) / 2e-6, 1e-6);
}

TEST(Sphere, LowerCapSolvesGraphMcf) {
  SphereBarrier sb{Eigen::Vector2d::Zero(), 2.0, 1.0, 2};
  const double t = 0.1;
  auto residual = [&](int n) {
    GridND g({Grid1D(-0.3, 0.3, n, Topology::bounded), Grid1D(-0.3, 0.3, n, Topology::bounded)});
    const Field u = sample(g, [&](const Eigen::VectorXd& x) { return sphere_eval(sb, x, t); }, t);
    const VectorField du = gradient(u);
    const MatrixField d2u = hessian(u);
    double r = 0;
    for (Eigen::Index k = 0; k < g.node_count(); ++k) {
      const auto idx = g.multi_index(k);
      if (idx[0] == 0 || idx[1] == 0 || idx[0] == n || idx[1] == n) continue;
      const Eigen::Vector2d p = du.values.col(k);
      const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() - p * p.transpose() / (1 + p.squaredNorm());
      const double mcf = (m.cwiseProduct(d2u.at(k))).sum();
      r = std::max(r, std::abs(sphere_time_derivative(sb, g.coordinates(k), t) - mcf));
    }
    return r;
  };
  const double r64 = residual(64), r128 = residual(128);
  EXPECT_LT(r128, 1e-4);
  EXPECT_GT(std::log2(r64 / r128), 1.8);
}

TEST(Step, SharpValues) {
  StepData single{2.0, 0.5};
  EXPECT_EQ(step_eval(single, 0.6), 2.0);
  EXPECT_EQ(step_eval(single, 0.4), -2.0);
  StepData cren{1.0, 0.0, StepMode::crenellated, 1.0, 0.0};
  EXPECT_EQ(step_eval(cren, 0.5), 1.0);
  EXPECT_EQ(step_eval(cren, 1.5), -1.0);
  EXPECT_EQ(step_eval(cren, -0.5), -1.0);
  EXPECT_EQ(step_eval(cren, 2.25), 1.0);
}

TEST(Step, MollifiedAgreesAwayFromJumps) {
  StepData cren{1.0, 0.0, StepMode::crenellated, 2.0, 0.1};
  StepData sharp = cren;
  sharp.eps = 0.0;
  for (double x = -4; x <= 4; x += 0.013) {
    const double d = std::abs(x / 2.0 - std::round(x / 2.0)) * 2.0;
    const double v = step_eval(cren, x);
    EXPECT_LE(std::abs(v), 1.0);
    if (d > 0.1) EXPECT_EQ(v, step_eval(sharp, x));
  }
  // odd about each jump
  for (double y : {0.01, 0.05, 0.09}) {
    EXPECT_NEAR(step_eval(cren, 2.0 + y), -step_eval(cren, 2.0 - y), 1e-14);
  }
  cren.eps = 1.0;
  EXPECT_THROW(step_eval(cren, 0.0), DomainError);
}

TEST(Step, BumpCdfIsADistribution) {
  EXPECT_NEAR(bump_cdf(0.0), 0.5, 1e-14);
  EXPECT_EQ(bump_cdf(-1.0), 0.0);
  EXPECT_EQ(bump_cdf(1.0), 1.0);
  double prev = 0;
  for (double u = -1; u <= 1; u += 0.01) {
    const double v = bump_cdf(u);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
}

TEST(Inverf, ZeroOddAndRoundTrip) {
  EXPECT_EQ(inverf(0.0), 0.0);
  EXPECT_THROW(inverf(1.0), DomainError);
  EXPECT_THROW(inverf(-1.5), DomainError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double y = u(rng);
    EXPECT_NEAR(std::erf(inverf(y)), y, 1e-12);
    EXPECT_EQ(inverf(-y), -inverf(y));
  }
  for (double y : {1 - 1e-6, 1 - 1e-10, 1 - 1e-14, 1e-300}) EXPECT_NEAR(std::erf(inverf(y)), y, 1e-12);
}
