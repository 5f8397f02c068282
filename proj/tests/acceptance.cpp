// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "parablab/barriers.hpp"
#include "parablab/experiment.hpp"
#include "parablab/finsler.hpp"
#include "parablab/flows.hpp"
#include "parablab/solver.hpp"
#include "parablab/verify.hpp"

using namespace parablab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::VectorXd random_p(std::mt19937_64& rng, int n, double lo, double hi) {
  std::normal_distribution<double> g;
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = g(rng);
  const double r = std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
  return p * (r / p.norm());
}

TimeStepPlan until(double t) {
  TimeStepPlan p;
  p.t_end = t;
  return p;
}

Outcome alpha_closed_form_mcf() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd p = random_p(rng, n, 0.1, 10.0);
      worst = std::max(worst, std::abs(alpha(mcf_coefficients(p), p) - 1.0 / (1.0 + p.squaredNorm())));
    }
  return {worst < 1e-6, fmt("max |alpha - 1/(1+|p|^2)| = %.2e over 600 samples", worst)};
}

Outcome psi_pde_residual() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> uz(-0.9, 0.9), ut(0.05, 3.0);
  double closed = 0.0, fd = 0.0;
  for (double c : {0.25, 1.0, 4.0}) {
    const PsiBarrier b(c);
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng), z = uz(rng) * b.z_limit(t);
      const PsiDerivatives d = psi_derivs(b, z, t);
      closed = std::max(closed, std::abs(d.dt - d.d2 / (4 * c * d.d1 * d.d1)));
      const double hz = 1e-4 * b.z_limit(t), ht = 1e-5 * t;
      const double p0 = psi_eval(b, z, t), pp = psi_eval(b, z + hz, t), pm = psi_eval(b, z - hz, t);
      const double d1 = (pp - pm) / (2 * hz), d2 = (pp - 2 * p0 + pm) / (hz * hz);
      const double dt = (psi_eval(b, z, t + ht) - psi_eval(b, z, t - ht)) / (2 * ht);
      fd = std::max(fd, std::abs(dt - d2 / (4 * c * d1 * d1)));
    }
  }
  return {closed < 1e-8 && fd < 1e-5, fmt("closed-form residual %.2e, finite-difference residual %.2e", closed, fd)};
}

Outcome isotropic_reduction() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const FinslerNorm e = euclid_norm(n);
    for (int i = 0; i < 500; ++i) {
      const Eigen::VectorXd p = random_p(rng, n, 1e-3, 10.0);
      worst = std::max(worst, (flow_coefficients(e, p) - mcf_coefficients(p)).cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-10, fmt("max entry difference %.2e over 1500 samples", worst)};
}

Outcome heat_zero_counting() {
  // Neumann problem on [-1, 1] with data sign(x): the even reflections give jumps at 2k
  // with alternating direction, so u = sum_k (-1)^k erf((x - 2k) sqrt(c/t)).
  const double c = 0.25, M = 1.0;
  const Grid1D g(-1.0, 1.0, 4000, Topology::bounded);
  Trajectory tr;
  tr.snapshots.push_back(sample1d(g, [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }));
  for (double t : logspace(1e-3, 0.1, 30)) {
    tr.snapshots.push_back(sample1d(
        g,
        [&](double x) {
          double s = 0.0;
          for (int k = -12; k <= 12; ++k) s += (k % 2 == 0 ? 1.0 : -1.0) * std::erf((x - 2.0 * k) * std::sqrt(c / t));
          return std::clamp(s, -M, M);
        },
        t));
  }
  TimeWindow w;
  w.t_min = 1e-3;
  const auto r = heat_zero_counting_gradient(tr, M, c, w, 0.02);
  return {r.passed, fmt("max relative violation %.3e (tolerance %.2f)", r.max_defect, r.tolerance)};
}

Outcome intersection_monotone() {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> amp(-0.3, 0.3), shift(-0.5, 0.5), height(0.2, 0.6);
  const Grid1D g(-1.0, 1.0, 200, Topology::bounded);
  const auto times = linspace(0.005, 0.2, 20);
  int failures = 0, decreased = 0, first = 0, last = 0;
  for (int run = 0; run < 100; ++run) {
    double a[8];
    for (double& v : a) v = amp(rng);
    const Field u0 = sample1d(g, [&](double x) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += a[k] * std::cos((k + 1) * kPi * (x + 1.0) / 2.0);
      return s;
    });
    const StepData sd{height(rng), shift(rng), StepMode::single, 1.0, 4.0 * g.spacing()};
    const Field b0 = sample1d(g, [&](double x) { return step_eval(sd, x); });
    const auto tu = evolve(csf(), u0, BoundaryCondition::neumann_zero(), until(0.2), times);
    const auto tb = evolve(csf(), b0, BoundaryCondition::neumann_zero(), until(0.2), times);
    const auto r = intersection_monotonicity(tu, tb, 1e-9);
    const auto counts = r.metadata.at("counts").get<std::vector<int>>();
    failures += !r.passed;
    decreased += counts.back() < counts.front();
    first += counts.front();
    last += counts.back();
  }
  return {failures == 0, fmt("%d/100 runs with an increase; %d runs lost intersections; total count %d -> %d",
                             failures, decreased, first, last)};
}

Outcome comparison_principle() {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> amp(-0.5, 0.5), gap(0.0, 0.2);
  const Grid1D g1(0.0, 2.0 * kPi, 128, Topology::periodic);
  const GridND g2({Grid1D(0.0, 2.0 * kPi, 24, Topology::periodic), Grid1D(0.0, 2.0 * kPi, 24, Topology::periodic)});
  int failures = 0;
  double worst = -1e300;
  for (int run = 0; run < 100; ++run) {
    const int kind = run % 3;
    const double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng), d0 = gap(rng), d1 = gap(rng);
    const int m = 1 + run % 4;
    auto low = [&](const Eigen::VectorXd& x) {
      const double y = x.size() > 1 ? x[1] : 0.0;
      return a1 * std::sin(x[0]) + a2 * std::cos(m * x[0] + y) + a3 * std::sin(2 * y);
    };
    // nonnegative gap that touches zero on a set of positive measure
    auto high = [&](const Eigen::VectorXd& x) { return low(x) + std::max(0.0, d0 + d1 * std::sin(m * x[0]) - 0.1); };
    const GridND& g = kind == 2 ? g2 : GridND(g1);
    const Flow f = kind == 0 ? Flow(heat_1d(0.25)) : kind == 1 ? Flow(csf()) : Flow(mcf_graph(2));
    const auto pair = evolve_pair_ordered(f, sample(g, low), sample(g, high), BoundaryCondition::periodic(),
                                          until(0.1), {0.05, 0.1});
    const auto r = check_comparison(pair, 1e-12);
    failures += !r.passed;
    worst = std::max(worst, r.max_defect);
  }
  return {failures == 0, fmt("%d/100 pairs crossed; worst -min gap %.2e", failures, worst)};
}

Outcome displacement_exponents() {
  const Grid1D g(-2.0, 2.0, 2000, Topology::bounded);
  const auto times = logspace(1e-4, 1e-2, 12);
  bool ok = true;
  std::string detail;
  for (double a : {0.25, 0.5, 0.75}) {
    const Field u0 = sample1d(g, [a](double x) { return std::pow(std::abs(x), a); });
    const auto tr = evolve(heat_1d(0.25), u0, BoundaryCondition::neumann_zero(), until(times.back()), times);
    std::vector<double> t, y;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      t.push_back(tr.snapshots[k].time());
      y.push_back(interpolate(tr.snapshots[k], 0.0));
    }
    const double e = fit_power_law(t, y);
    ok = ok && std::abs(e - a / 2) <= 0.1 * a / 2;
    detail += fmt("%salpha %.2f: %.4f vs %.4f", detail.empty() ? "" : "; ", a, e, a / 2);
  }
  return {ok, detail};
}

Outcome double_coordinate() {
  const double M = 2.0, t_end = 8.0 / 3.0;
  const auto ref = crenellated_reference(csf(), 512, 4.0, 2.0, t_end, 60);
  const auto cal = calibrate_double_coordinate(ref, M);
  if (!std::isfinite(cal.c)) return {false, "no constant in [1/64, 1] passes at eps = 4h"};
  const double z4 = cal.report.metadata.at("max_Z").get<double>(), tol = cal.report.tolerance;
  bool ok = cal.report.passed;
  std::string detail = fmt("c = %.4f, T' = %.4f; eps 4h: max Z %.4f <= tol %.4f", cal.c, cal.T_prime, z4, tol);
  for (double e : {8.0, 16.0}) {
    const auto tr = crenellated_reference(csf(), 512, e, 2.0, t_end, 60);
    DoubleCoordinateOptions o;
    o.window.t_max = cal.T_prime;
    const auto r = double_coordinate_defect(tr, ScaledPsi(M, cal.c), o);
    const double z = r.metadata.at("max_Z").get<double>();
    ok = ok && std::abs(z - z4) <= 2.0 * tol;
    detail += fmt("; %gh: max Z %.4f", e, z);
  }
  return {ok, detail};
}

Outcome sphere_exactness() {
  const SphereBarrier sb{Eigen::Vector2d::Zero(), 2.0, 1.0, 2};
  const double t = 0.1;
  auto residual = [&](int n) {
    const GridND g({Grid1D(-0.3, 0.3, n, Topology::bounded), Grid1D(-0.3, 0.3, n, Topology::bounded)});
    const Field u = sample(g, [&](const Eigen::VectorXd& x) { return sphere_eval(sb, x, t); }, t);
    const auto& mcf = mcf_graph(2);
    const VectorField du = gradient(u);
    const MatrixField d2u = hessian(u);
    double r = 0.0;
    for (Eigen::Index k = 0; k < g.node_count(); ++k) {
      const auto idx = g.multi_index(k);
      if (idx[0] == 0 || idx[1] == 0 || idx[0] == n || idx[1] == n) continue;
      const double rhs = mcf.coeff(du.values.col(k)).cwiseProduct(d2u.at(k)).sum();
      r = std::max(r, std::abs(sphere_time_derivative(sb, g.coordinates(k), t) - rhs));
    }
    return r;
  };
  const double r64 = residual(64), r128 = residual(128), r256 = residual(256);
  const double o1 = std::log2(r64 / r128), o2 = std::log2(r128 / r256);
  double C = 0.0;
  for (auto [n, r] : {std::pair{64, r64}, {128, r128}, {256, r256}}) C = std::max(C, r / std::pow(0.6 / n, 2));
  return {o1 >= 1.8 && o2 >= 1.8 && C < 10.0,
          fmt("residuals %.2e %.2e %.2e, orders %.2f %.2f, max r/h^2 = %.3f", r64, r128, r256, o1, o2, C)};
}

Outcome initial_data_rate() {
  const Grid1D g(-1.0, 1.0, 1000, Topology::bounded);
  const auto times = logspace(1e-4, 1e-2, 12);
  bool ok = true;
  std::string detail;
  struct Case {
    const char* name;
    double alpha;
    double amplitude;
    ModulusOfContinuity omega;
  };
  for (const Case& c : {Case{"lipschitz", 1.0, 1.0, ModulusOfContinuity::lipschitz(1.0)},
                        Case{"holder-1/2", 0.5, 0.2, ModulusOfContinuity::holder(0.2, 0.5)}}) {
    const Field u0 = sample1d(g, [&](double x) { return c.amplitude * std::pow(std::abs(x), c.alpha); });
    const auto tr = evolve(mcf_graph(1), u0, BoundaryCondition::neumann_zero(), until(times.back()), times);
    std::vector<double> t, y;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      t.push_back(tr.snapshots[k].time());
      y.push_back((tr.snapshots[k].values() - u0.values()).cwiseAbs().maxCoeff());
    }
    const double e = fit_power_law(t, y), want = c.alpha / 2;
    const auto r = convergence_to_initial_data(tr, c.omega);
    ok = ok && std::abs(e - want) <= 0.1 * want && r.passed;
    detail += fmt("%s%s: exponent %.4f vs %.2f, bound %s", detail.empty() ? "" : "; ", c.name, e, want,
                  r.passed ? "holds" : "violated");
  }
  return {ok, detail};
}

Outcome finsler_certificates() {
  const auto e = certify_id("euclid", 2).at("constants");
  const double A = e.at("A"), k = e.at("k"), C1 = e.at("C1");
  const auto q = certify_id("quartic:0.001", 2).at("constants");
  const double qC1 = q.at("C1");
  auto symmetric = [](const std::string& id) { return check_symmetry(norm_from_id(id, 2)).passed; };
  const bool diag = symmetric("elliptic:1,1.5,2"), spatial = symmetric("elliptic:1,0,0;0,1.5,0.3;0,0.3,2");
  const bool vertical = symmetric("elliptic:1,0.3,0;0.3,1.5,0;0,0,2");
  const bool ok = std::abs(A - 0.5) <= 1e-3 && std::abs(k - 1.0) <= 1e-3 && C1 <= 1e-6 &&
                  qC1 * qC1 < 4.0 / std::sqrt(2.0) && diag && spatial && !vertical;
  return {ok, fmt("euclid A %.6f k %.6f C1 %.1e; quartic C1^2 %.2e < %.3f; symmetry diagonal %s, spatial coupling "
                  "%s, vertical coupling %s",
                  A, k, C1, qC1 * qC1, 4.0 / std::sqrt(2.0), diag ? "yes" : "no", spatial ? "yes" : "no",
                  vertical ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"alpha closed form for mean curvature flow", alpha_closed_form_mcf},
      {"psi barrier solves its equation", psi_pde_residual},
      {"isotropic norm reduces to graph mean curvature flow", isotropic_reduction},
      {"heat zero-counting gradient bound", heat_zero_counting},
      {"intersection counts never increase", intersection_monotone},
      {"discrete comparison principle", comparison_principle},
      {"displacement exponents for heat flow", displacement_exponents},
      {"double-coordinate estimate on crenellated data", double_coordinate},
      {"shrinking sphere solves graph mean curvature flow", sphere_exactness},
      {"convergence rate to initial data", initial_data_rate},
      {"Finsler certificates", finsler_certificates},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.passed;
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
