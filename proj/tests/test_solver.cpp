#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "parablab/barriers.hpp"
#include "parablab/errors.hpp"
#include "parablab/selling.hpp"
#include "parablab/solver.hpp"

using namespace parablab;

namespace {

constexpr double kPi = std::numbers::pi;

Grid1D periodic_line(int n) { return Grid1D(0.0, 2.0 * kPi, n, Topology::periodic); }

TimeStepPlan until(double t) {
  TimeStepPlan p;
  p.t_end = t;
  return p;
}

template <int N>
Eigen::Matrix<double, N, N> rebuild(const std::vector<LatticeStencil<N>>& st) {
  Eigen::Matrix<double, N, N> m = Eigen::Matrix<double, N, N>::Zero();
  for (const auto& s : st) {
    const Eigen::Matrix<double, N, 1> v = s.offset.template cast<double>();
    m += s.weight * v * v.transpose();
  }
  return m;
}

}  // namespace

TEST(Selling, ReconstructsRandomMatrices) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Matrix2d b2;
    Eigen::Matrix3d b3;
    for (int i = 0; i < 4; ++i) b2(i / 2, i % 2) = nd(rng);
    for (int i = 0; i < 9; ++i) b3(i / 3, i % 3) = nd(rng);
    const Eigen::Matrix2d d2 = b2 * b2.transpose() + 1e-3 * Eigen::Matrix2d::Identity();
    const Eigen::Matrix3d d3 = b3 * b3.transpose() + 1e-3 * Eigen::Matrix3d::Identity();
    const auto s2 = selling_decomposition<2>(d2);
    const auto s3 = selling_decomposition<3>(d3);
    EXPECT_LT((rebuild<2>(s2) - d2).norm(), 1e-10 * d2.norm());
    EXPECT_LT((rebuild<3>(s3) - d3).norm(), 1e-10 * d3.norm());
    for (const auto& s : s2) EXPECT_GT(s.weight, 0.0);
    for (const auto& s : s3) EXPECT_GT(s.weight, 0.0);
  }
}

TEST(Selling, DiagonalUsesAxes) {
  const auto s = selling_decomposition<2>(Eigen::Vector2d(2.0, 3.0).asDiagonal().toDenseMatrix());
  ASSERT_EQ(s.size(), 2u);
  for (const auto& st : s) EXPECT_EQ(st.offset.cwiseAbs().sum(), 1);
}

TEST(Evolve, HeatSineDecays) {
  const Grid1D g = periodic_line(256);
  const Field u0 = sample1d(g, [](double x) { return std::sin(x); });
  const auto traj = evolve(heat_1d(0.25), u0, BoundaryCondition::periodic(), until(0.5), {0.25, 0.5});
  ASSERT_EQ(traj.size(), 3u);
  EXPECT_DOUBLE_EQ(traj.back().time(), 0.5);
  const Field exact = sample1d(g, [](double x) { return std::exp(-0.5) * std::sin(x); }, 0.5);
  EXPECT_LT((traj.back().values() - exact.values()).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_GT(traj.stats.steps, 0);
  EXPECT_LE(traj.stats.dt_min, traj.stats.dt_max);
}

TEST(Evolve, HeatConvergesAtSecondOrder) {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const Grid1D g = periodic_line(n);
    const Field u0 = sample1d(g, [](double x) { return std::cos(2 * x); });
    const auto traj = evolve(heat_1d(0.25), u0, BoundaryCondition::periodic(), until(0.1));
    const Field exact = sample1d(g, [](double x) { return std::exp(-0.4) * std::cos(2 * x); });
    const double err = (traj.back().values() - exact.values()).cwiseAbs().maxCoeff();
    if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.8);
    prev = err;
  }
}

TEST(Evolve, ConstantStaysConstant) {
  const Grid1D g(-1.0, 1.0, 40, Topology::bounded);
  const Field u0 = sample1d(g, [](double) { return 0.7; });
  for (const Flow& f : std::vector<Flow>{csf(), heat_1d(1.0), sine_fully_nonlinear()}) {
    const auto traj = evolve(f, u0, BoundaryCondition::neumann_zero(), until(0.2));
    EXPECT_LT((traj.back().values().array() - 0.7).abs().maxCoeff(), 1e-14) << flow_id(f);
  }
}

TEST(Evolve, CsfLineIsStationaryUnderDirichlet) {
  const Grid1D g(-1.0, 1.0, 50, Topology::bounded);
  const Field u0 = sample1d(g, [](double x) { return 0.3 * x + 0.1; });
  const auto bc = BoundaryCondition::dirichlet([](const Eigen::VectorXd& x, double) { return 0.3 * x[0] + 0.1; });
  const auto traj = evolve(csf(), u0, bc, until(0.3));
  EXPECT_LT((traj.back().values() - u0.values()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Evolve, MaximumPrinciple) {
  const Grid1D g = periodic_line(128);
  const Field u0 = sample1d(g, [](double x) { return x < kPi ? 1.0 : -0.5; });
  for (const Flow& f : std::vector<Flow>{csf(), heat_1d(0.5), sine_fully_nonlinear(), plaplace_reg(1.5, 0.2)}) {
    const auto traj = evolve(f, u0, BoundaryCondition::periodic(), until(0.1), {0.01, 0.05, 0.1});
    for (const auto& s : traj.snapshots) {
      EXPECT_LE(s.values().maxCoeff(), 1.0 + 1e-14) << flow_id(f);
      EXPECT_GE(s.values().minCoeff(), -0.5 - 1e-14) << flow_id(f);
    }
  }
}

TEST(Evolve, Mcf2dShrinksBump) {
  const Grid1D ax(-1.0, 1.0, 32, Topology::periodic);
  const GridND g({ax, ax});
  const Field u0 = sample(g, [](const Eigen::VectorXd& x) { return std::exp(-8 * x.squaredNorm()); });
  const auto traj = evolve(mcf_graph(2), u0, BoundaryCondition::periodic(), until(0.05));
  EXPECT_LT(traj.back().values().maxCoeff(), u0.values().maxCoeff());
  EXPECT_GE(traj.back().values().minCoeff(), u0.values().minCoeff() - 1e-14);
}

TEST(Evolve, Mcf3dOnSmallGrid) {
  const Grid1D ax(-1.0, 1.0, 10, Topology::bounded);
  const GridND g({ax, ax, ax});
  const Field u0 = sample(g, [](const Eigen::VectorXd& x) { return 0.2 * std::cos(kPi * x[0]) * std::cos(kPi * x[1]); });
  const auto traj = evolve(mcf_graph(3), u0, BoundaryCondition::neumann_zero(), until(0.02));
  EXPECT_LE(traj.back().values().maxCoeff(), 0.2 + 1e-14);
}

TEST(Evolve, RejectsBadInput) {
  const Grid1D g = periodic_line(16);
  const Field u0 = sample1d(g, [](double x) { return std::sin(x); });
  EXPECT_THROW(evolve(csf(), u0, BoundaryCondition::neumann_zero(), until(0.1)), DomainError);
  EXPECT_THROW(evolve(csf(), u0, BoundaryCondition::periodic(), until(0.1), {0.05, 0.02}), DomainError);
  EXPECT_THROW(evolve(mcf_graph(2), u0, BoundaryCondition::periodic(), until(0.1)), GridMismatch);
  TimeStepPlan p = until(0.1);
  p.max_grad_clip = 0.5;
  EXPECT_THROW(evolve(csf(), u0, BoundaryCondition::periodic(), p), SolverAbort);
}

TEST(Evolve, ManifestFields) {
  const Grid1D g = periodic_line(16);
  const Field u0 = sample1d(g, [](double x) { return std::sin(x); });
  const auto traj = evolve(csf(), u0, BoundaryCondition::periodic(), until(0.1), {0.05, 0.1});
  const auto m = manifest(csf(), BoundaryCondition::periodic(), traj);
  EXPECT_EQ(m["flow"], "csf");
  EXPECT_EQ(m["bc"], "periodic");
  EXPECT_EQ(m["output_times"].size(), 3u);
  EXPECT_EQ(m["dt"]["steps"].get<long>(), traj.stats.steps);
}

TEST(Pair, OrderedPairsStayOrdered) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  const Grid1D g = periodic_line(64);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = ur(rng), b = ur(rng), d = 0.05 * (1.0 + ur(rng));
    const Field lo = sample1d(g, [&](double x) { return a * std::sin(x) + b * std::cos(3 * x); });
    const Field hi = sample1d(g, [&](double x) { return a * std::sin(x) + b * std::cos(3 * x) + d * (1 + std::sin(2 * x)); });
    const auto r = evolve_pair_ordered(csf(), lo, hi, BoundaryCondition::periodic(), until(0.2));
    ASSERT_EQ(r.step_times.size(), r.min_gap.size());
    for (double gap : r.min_gap) EXPECT_GE(gap, -1e-12);
    EXPECT_DOUBLE_EQ(r.step_times.back(), 0.2);
  }
  const Field lo = sample1d(g, [](double x) { return std::sin(x); });
  EXPECT_THROW(evolve_pair_ordered(csf(), lo.with_values(lo.values().array() + 1.0), lo,
                                   BoundaryCondition::periodic(), until(0.1)),
               DomainError);
}

TEST(Pair, Mcf2dOrdered) {
  const Grid1D ax(-1.0, 1.0, 24, Topology::periodic);
  const GridND g({ax, ax});
  const Field lo = sample(g, [](const Eigen::VectorXd& x) { return std::sin(kPi * x[0]) * std::cos(kPi * x[1]); });
  const Field hi = sample(g, [](const Eigen::VectorXd& x) {
    return std::sin(kPi * x[0]) * std::cos(kPi * x[1]) + 0.05 * std::exp(-4 * x.squaredNorm());
  });
  const auto r = evolve_pair_ordered(mcf_graph(2), lo, hi, BoundaryCondition::periodic(), until(0.05));
  for (double gap : r.min_gap) EXPECT_GE(gap, -1e-12);
}

TEST(Auxiliary, HeatCaseMatchesErf) {
  const Grid1D g(0.0, 6.0, 512, Topology::bounded);
  TimeStepPlan p = until(0.5);
  const auto r = solve_auxiliary_phi(heat_profile(1.0), g, p, {0.05, 0.1, 0.2, 0.5});
  ASSERT_EQ(r.slope_at_origin.size(), 4u);
  for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
    const Field& s = r.trajectory.snapshots[k];
    const double t = s.time();
    const Field exact = sample1d(g, [t](double z) { return std::erf(z / (2 * std::sqrt(t))); });
    EXPECT_LT((s.values() - exact.values()).cwiseAbs().maxCoeff(), 5e-3) << t;
    EXPECT_EQ(s.values()[0], 0.0);
  }
}

TEST(Auxiliary, SlopeBelowBarrierSlope) {
  const Grid1D g(0.0, 6.0, 512, Topology::bounded);
  const auto r = solve_auxiliary_phi(heat_profile(1.0), g, until(0.2), {0.05, 0.1, 0.2});
  const PsiBarrier psi(0.25);
  for (std::size_t k = 0; k < r.slope_at_origin.size(); ++k) {
    const double t = r.trajectory.snapshots[k + 1].time();
    EXPECT_LE(r.slope_at_origin[k], psi_derivs(psi, 0.0, t / 4).d1) << t;
  }
}

TEST(Auxiliary, McfProfileIsMonotone) {
  const Grid1D g(0.0, 4.0, 200, Topology::bounded);
  const auto r = solve_auxiliary_phi(mcf_profile(), g, until(0.1));
  const Eigen::VectorXd& v = r.trajectory.back().values();
  for (Eigen::Index i = 1; i < v.size(); ++i) EXPECT_GE(v[i], v[i - 1] - 1e-14);
}
