#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "parablab/barriers.hpp"
#include "parablab/fields.hpp"
#include "parablab/flows.hpp"
#include "parablab/report.hpp"
#include "parablab/solver.hpp"

namespace parablab {

/// Concave, continuous, nondecreasing omega with omega(0) = 0.
struct ModulusOfContinuity {
  std::function<double(double)> omega;
  std::function<double(double)> left_derivative;

  static ModulusOfContinuity lipschitz(double L);
  /// L r^alpha, 0 < alpha <= 1.
  static ModulusOfContinuity holder(double L, double alpha);
  /// Sampled probe of omega(0) = 0, monotonicity and midpoint concavity on [0, r_max].
  bool validate(double r_max, int samples = 256) const;
};

/// Snapshots with t_min <= t <= t_max take part in a check.
struct TimeWindow {
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();
  bool contains(double t) const { return t >= t_min && t <= t_max; }
};

/// defect = -min gap over all steps; passes iff min gap >= -rel_tol * scale.
VerificationReport check_comparison(const PairResult& pair, double rel_tol = 1e-12);

struct DoubleCoordinateOptions {
  /// Only pairs with 0 <= |y - x| <= z_M(t).
  bool restrict_to_G = false;
  TimeWindow window;
  /// Adds gamma (x + y - 2 beta)^2 to phi; used on bounded intervals.
  double gamma = 0.0;
  double beta = 0.0;
};

/// Z(x,y,t) = u(y,t) - u(x,t) - phi(|y - x|, t) maximized over node pairs and
/// snapshots; tolerance 10 h (1 + sup phi') over the sampled region.
VerificationReport double_coordinate_defect(const Trajectory& traj, const ScaledPsi& phi,
                                            const DoubleCoordinateOptions& opt = {});

/// C1 sqrt(t) (1 + t) exp(C2 / t).
std::function<double(double)> periodic_gradient_bound(double C1, double C2);

/// max over snapshots of max|Du|(t) - bound(t).
VerificationReport gradient_bound_check(const Trajectory& traj, const std::function<double(double)>& bound,
                                        TimeWindow window = {}, double tol = 0.0);

namespace displacement {
/// u(x,0) <= L |x - h|; pointwise comparison with the erf cone.
struct Lipschitz {
  double L;
  double h = 0.0;
};
/// |u(x,0) - u(h,0)| <= L |x - h|^alpha; apex displacement against the optimized cone bound.
struct Holder {
  double L;
  double alpha;
  double h = 0.0;
};
struct Modulus {
  ModulusOfContinuity omega;
  double h = 0.0;
};
/// u(x,0) <= c sigma(x - s); compared for x < s.
struct Step {
  double c;
  double s = 0.0;
};
using Kind = std::variant<Lipschitz, Holder, Modulus, Step>;
}  // namespace displacement

/// inf over k > 0 of 2 w'(k) sqrt(Lambda(w'(k)) t / pi) - w'(k) k + w(k).
double modulus_displacement_bound(const ModulusOfContinuity& omega, const std::function<double(double)>& Lambda_of_K,
                                  double t);

/// Negative tol selects 10 h (1 + L) for the pointwise kinds and 10 h for the apex kinds.
VerificationReport displacement_check(const Trajectory& traj, const displacement::Kind& kind,
                                      const std::function<double(double)>& Lambda_of_K, double tol = -1.0);

struct IntersectionCount {
  int count = 0;
  /// Every node is a tie: u and phi agree to eps_tie everywhere.
  bool degenerate = false;
};

/// Sign changes of u - phi; ties (|w| <= eps_tie) inherit the previous strict sign.
/// Bounded grids require |w| > eps_tie at both end nodes.
IntersectionCount count_intersections(const Field& u, const Field& phi, double eps_tie);

/// Passes iff the intersection count never increases between snapshots.
VerificationReport intersection_monotonicity(const Trajectory& u, const Trajectory& phi, double eps_tie);

/// 2N sqrt(c/(pi t)) exp(-inverf(u/N)^2), N = M / erf(sqrt(c) dist / (2 sqrt t)).
double heat_gradient_bound(double u, double t, double M, double dist, double c);

/// Relative defect (u_x - bound)/bound at interior nodes; tolerance rel_tol.
VerificationReport heat_zero_counting_gradient(const Trajectory& traj, double M, double c, TimeWindow window = {},
                                               double rel_tol = 0.02);

struct BarrierFamilyOptions {
  /// Step height of the barrier is `height_factor * M` on either side.
  double height_factor = 2.0;
  /// Window constant: probes need t <= c d^2 / Lambda(c M / d).
  double window_c = 1.0;
  TimeWindow window;
  /// Probe nodes (indices into the trajectory grid); empty means every interior node.
  std::vector<int> probes;
  /// Barrier grid: half-width and spacing refinement relative to the trajectory grid.
  double half_width = 0.0;  // 0 selects twice the domain length
  int refine = 1;
  double rel_tol = 0.0;
  double abs_tol = -1.0;  // negative selects 10 h
};

/// Gradient of u against the step-data solution matched at the same height.
/// The barrier is computed once and translated, so the flow must be autonomous.
VerificationReport barrier_family_gradient(const Trajectory& traj, const Quasilinear1D& flow, double M,
                                           const BarrierFamilyOptions& opt = {});

/// v = sqrt(1 + |Du|^2) from central differences.
Field gradient_function(const Field& u);

namespace eh {
struct Periodic {
  double c;
};
/// Ball B_R(center); eta = R^2 - 2 n t - |x - center|^2 + u^2.
struct Interior {
  double R;
  double q;
  double c;
  Eigen::VectorXd center;
};
using Kind = std::variant<Periodic, Interior>;
}  // namespace eh

/// v - bound with the periodic bound t^{1/2} exp(c (|u| - 2M)^2 / (4t)) or the interior bound
/// t^{q/2} exp(c q (u + 2M)^2 / (4t)) / eta. Negative tol selects 10 h.
VerificationReport eh_bound_check(const Trajectory& traj, double M, const eh::Kind& kind, TimeWindow window = {},
                                  double tol = -1.0);

/// sup over interior nodes of |u(x,t) - u0(x)| - [sqrt(2nt) + omega(sqrt(2nt))] per snapshot.
VerificationReport convergence_to_initial_data(const Trajectory& traj, const ModulusOfContinuity& omega,
                                               double tol = -1.0);

/// Least-squares slope of log y against log t; nonpositive entries are skipped.
double fit_power_law(const std::vector<double>& t, const std::vector<double>& y);

/// Smallest value in [lo, hi] for which `passes` holds, assuming passes is monotone
/// (false below a threshold, true above). Bisection in log scale down to rel_tol.
/// Returns NaN when hi fails.
double calibrate(const std::function<bool(double)>& passes, double lo, double hi, double rel_tol = 1e-2);

}  // namespace parablab
