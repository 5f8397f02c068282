#include "parablab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parablab/errors.hpp"
#include "parablab/optimize.hpp"

namespace parablab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

const Grid1D& line_of(const Trajectory& traj, const char* who) {
  if (traj.snapshots.empty()) throw DomainError(std::string(who) + ": empty trajectory");
  const GridND& g = traj.front().grid();
  if (g.dim() != 1) throw DomainError(std::string(who) + ": needs a one-dimensional grid");
  return g.axis(0);
}

double max_abs(const Field& f) { return f.values().cwiseAbs().maxCoeff(); }

nlohmann::json window_json(const TimeWindow& w) {
  return {{"t_min", w.t_min}, {"t_max", std::isfinite(w.t_max) ? nlohmann::json(w.t_max) : nlohmann::json("inf")}};
}

// Smallest spacing over the grid axes.
double min_spacing(const GridND& g) {
  double h = kInf;
  for (const auto& a : g.axes()) h = std::min(h, a.spacing());
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------

ModulusOfContinuity ModulusOfContinuity::lipschitz(double L) {
  if (!(L >= 0.0)) throw DomainError("ModulusOfContinuity: L must be nonnegative");
  return {[L](double r) { return L * r; }, [L](double) { return L; }};
}

ModulusOfContinuity ModulusOfContinuity::holder(double L, double alpha) {
  if (!(L >= 0.0) || !(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("ModulusOfContinuity: need L >= 0 and 0 < alpha <= 1");
  return {[L, alpha](double r) { return L * std::pow(r, alpha); },
          [L, alpha](double r) { return r > 0.0 ? L * alpha * std::pow(r, alpha - 1.0) : kInf; }};
}

bool ModulusOfContinuity::validate(double r_max, int samples) const {
  if (std::abs(omega(0.0)) > 1e-14) return false;
  const std::vector<double> r = linspace(0.0, r_max, samples);
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double a = omega(r[i - 1]), b = omega(r[i]);
    if (!(b >= a - 1e-14) || !std::isfinite(b)) return false;
    if (!(left_derivative(r[i]) >= 0.0)) return false;
    if (i + 1 < r.size()) {
      const double c = omega(r[i + 1]);
      if (b < 0.5 * (a + c) - 1e-12 * std::max(1.0, std::abs(b))) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

VerificationReport check_comparison(const PairResult& pair, double rel_tol) {
  if (pair.min_gap.empty()) throw DomainError("check_comparison: empty pair result");
  const double scale =
      std::max({1.0, max_abs(pair.first.front()), max_abs(pair.second.front())});
  const auto it = std::min_element(pair.min_gap.begin(), pair.min_gap.end());
  const std::size_t k = static_cast<std::size_t>(it - pair.min_gap.begin());
  return VerificationReport::make("comparison", -*it, rel_tol * scale, Witness{{}, pair.step_times[k], {*it}},
                                  {{"steps", pair.min_gap.size() - 1}, {"scale", scale}, {"rel_tol", rel_tol}});
}

VerificationReport double_coordinate_defect(const Trajectory& traj, const ScaledPsi& phi,
                                            const DoubleCoordinateOptions& opt) {
  const Grid1D& g = line_of(traj, "double_coordinate_defect");
  const int n = g.node_count();
  const double h = g.spacing();
  const Eigen::VectorXd x = g.coordinates();
  const double M = phi.M(), c = phi.psi().c();

  // Each snapshot is judged against its own grid tolerance 10 h (1 + sup phi'),
  // the sup taken over the sampled nonzero offsets at that time.
  double worst_excess = -kInf, worst_z = 0.0, worst_tol = 0.0, max_z = -kInf, off_diag = -kInf;
  double tol_min = kInf, tol_max = 0.0;
  Witness wit;
  int used = 0;
  for (const Field& snap : traj.snapshots) {
    const double t = snap.time();
    if (!(t > 0.0) || !opt.window.contains(t)) continue;
    ++used;
    const Eigen::VectorXd& u = snap.values();
    const double zmax = opt.restrict_to_G ? z_M(t, M, c) : kInf;
    double zt = -kInf, slope = 0.0;
    Witness wt;
    for (int j = 0; j < n; ++j) {
      const double d = j * h;
      if (d > zmax) break;
      const double ph = phi.value(d, t);
      const double sl = j > 0 ? phi.slope(d, t) : 0.0;
      if (std::isfinite(sl)) slope = std::max(slope, sl);
      const int imax = g.periodic() ? n : n - j;
      for (int i = 0; i < imax; ++i) {
        const int k = g.periodic() ? (i + j) % n : i + j;
        const double y = x[i] + d;
        const double quad = opt.gamma * std::pow(x[i] + y - 2.0 * opt.beta, 2);
        const double z = std::abs(u[k] - u[i]) - ph - quad;
        if (j > 0) off_diag = std::max(off_diag, z);
        if (z > zt) {
          zt = z;
          wt = Witness{{x[i], y}, t, {z, u[i], u[k], ph}};
        }
      }
    }
    const double tol = 10.0 * h * (1.0 + slope);
    tol_min = std::min(tol_min, tol);
    tol_max = std::max(tol_max, tol);
    max_z = std::max(max_z, zt);
    if (zt - tol > worst_excess) {
      worst_excess = zt - tol;
      worst_z = zt;
      worst_tol = tol;
      wit = wt;
    }
  }
  if (used == 0) throw DomainError("double_coordinate_defect: no snapshot inside the time window");
  return VerificationReport::make("double_coordinate", worst_z, worst_tol, wit,
                                  {{"M", M},
                                   {"c", c},
                                   {"region", opt.restrict_to_G ? "G" : "full"},
                                   {"window", window_json(opt.window)},
                                   {"snapshots", used},
                                   {"gamma", opt.gamma},
                                   {"beta", opt.beta},
                                   {"max_Z", max_z},
                                   {"max_off_diagonal", off_diag},
                                   {"tol_min", tol_min},
                                   {"tol_max", tol_max},
                                   {"h", h}});
}

std::function<double(double)> periodic_gradient_bound(double C1, double C2) {
  return [C1, C2](double t) { return C1 * std::sqrt(t) * (1.0 + t) * std::exp(C2 / t); };
}

VerificationReport gradient_bound_check(const Trajectory& traj, const std::function<double(double)>& bound,
                                        TimeWindow window, double tol) {
  double worst = -kInf;
  Witness wit;
  nlohmann::json rows = nlohmann::json::array();
  for (const Field& snap : traj.snapshots) {
    const double t = snap.time();
    if (!(t > 0.0) || !window.contains(t)) continue;
    const VectorField du = gradient(snap);
    Eigen::Index arg = 0;
    const double K = du.values.colwise().norm().maxCoeff(&arg);
    const double b = bound(t);
    rows.push_back({t, K, b});
    if (K - b > worst) {
      worst = K - b;
      const Eigen::VectorXd x = snap.grid().coordinates(arg);
      wit = Witness{std::vector<double>(x.data(), x.data() + x.size()), t, {K, b}};
    }
  }
  if (rows.empty()) throw DomainError("gradient_bound_check: no snapshot inside the time window");
  return VerificationReport::make("gradient_bound", worst, tol, wit,
                                  {{"window", window_json(window)}, {"samples", rows}});
}

// ---------------------------------------------------------------------------

double modulus_displacement_bound(const ModulusOfContinuity& omega, const std::function<double(double)>& Lambda_of_K,
                                  double t) {
  if (!(t > 0.0)) return 0.0;
  auto f = [&](double logk) {
    const double k = std::exp(logk);
    const double s = omega.left_derivative(k);
    if (!std::isfinite(s)) return kInf;
    return 2.0 * s * std::sqrt(Lambda_of_K(s) * t / kPi) - s * k + omega.omega(k);
  };
  const double lo = std::log(1e-14), hi = std::log(1e4);
  const int n = 400;
  double best = kInf, arg = lo;
  for (int i = 0; i <= n; ++i) {
    const double lk = lo + (hi - lo) * i / n;
    const double v = f(lk);
    if (v < best) {
      best = v;
      arg = lk;
    }
  }
  const double step = (hi - lo) / n;
  const double refined = golden_section_min(f, arg - step, arg + step, 1e-10);
  return std::min(best, f(refined));
}

VerificationReport displacement_check(const Trajectory& traj, const displacement::Kind& kind,
                                      const std::function<double(double)>& Lambda_of_K, double tol) {
  const Grid1D& g = line_of(traj, "displacement_check");
  const double h = g.spacing();
  const Eigen::VectorXd x = g.coordinates();
  const Field& u0 = traj.front();
  const double scale = std::max(1.0, max_abs(u0));
  double worst = -kInf;
  Witness wit;
  std::string id;
  nlohmann::json meta;
  auto record = [&](double d, double xx, double t, double u, double b) {
    if (d > worst) {
      worst = d;
      wit = Witness{{xx}, t, {u, b}};
    }
  };

  auto apex = [&](const ModulusOfContinuity& omega, double hpt) {
    const double base = interpolate(u0, hpt);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (std::abs(u0[i] - base) > omega.omega(std::abs(x[i] - hpt)) * (1.0 + 1e-9) + 1e-12 * scale)
        throw DomainError("displacement_check: initial data exceed the modulus at the apex");
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const Field& snap : traj.snapshots) {
      const double t = snap.time();
      if (!(t > 0.0)) continue;
      const double disp = std::abs(interpolate(snap, hpt) - base);
      const double b = modulus_displacement_bound(omega, Lambda_of_K, t);
      rows.push_back({t, disp, b});
      record(disp - b, hpt, t, disp, b);
    }
    meta["apex"] = hpt;
    meta["samples"] = rows;
    if (tol < 0.0) tol = 10.0 * h;
  };

  if (const auto* k = std::get_if<displacement::Lipschitz>(&kind)) {
    id = "displacement:lipschitz";
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (u0[i] > k->L * std::abs(x[i] - k->h) + 1e-12 * scale)
        throw DomainError("displacement_check: initial data above the cone");
    const ConeBarrier cone{k->L, k->h, Lambda_of_K(k->L), 0.0};
    for (const Field& snap : traj.snapshots) {
      const double t = snap.time();
      if (!(t > 0.0)) continue;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double b = cone_barrier_eval(cone, x[i], t);
        record(snap[i] - b, x[i], t, snap[i], b);
      }
    }
    meta = {{"L", k->L}, {"h", k->h}, {"Lambda", cone.Lambda}};
    if (tol < 0.0) tol = 10.0 * h * (1.0 + k->L);
  } else if (const auto* k = std::get_if<displacement::Holder>(&kind)) {
    id = "displacement:holder";
    apex(ModulusOfContinuity::holder(k->L, k->alpha), k->h);
    meta["L"] = k->L;
    meta["alpha"] = k->alpha;
  } else if (const auto* k = std::get_if<displacement::Modulus>(&kind)) {
    id = "displacement:modulus";
    apex(k->omega, k->h);
  } else {
    const auto& st = std::get<displacement::Step>(kind);
    id = "displacement:step";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double cap = x[i] < st.s ? -st.c : st.c;
      if (u0[i] > cap + 1e-12 * scale) throw DomainError("displacement_check: initial data above the step");
    }
    for (const Field& snap : traj.snapshots) {
      const double t = snap.time();
      if (!(t > 0.0)) continue;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = st.s - x[i];
        if (!(r > 0.0)) continue;
        const double lam = Lambda_of_K(2.0 * st.c / r);
        const double b = std::min(4.0 * st.c / r * std::sqrt(lam * t / kPi) - st.c, st.c);
        record(snap[i] - b, x[i], t, snap[i], b);
      }
    }
    meta = {{"c", st.c}, {"s", st.s}};
    if (tol < 0.0) tol = 10.0 * h * (1.0 + st.c);
  }
  if (!std::isfinite(worst)) worst = 0.0;
  meta["h"] = h;
  return VerificationReport::make(id, worst, tol, wit, meta);
}

// ---------------------------------------------------------------------------

IntersectionCount count_intersections(const Field& u, const Field& phi, double eps_tie) {
  if (!(u.grid() == phi.grid())) throw GridMismatch("count_intersections: grids differ");
  if (u.grid().dim() != 1) throw DomainError("count_intersections: needs a one-dimensional grid");
  const Eigen::VectorXd w = u.values() - phi.values();
  const Eigen::Index n = w.size();
  const bool periodic = u.grid().axis(0).periodic();
  Eigen::Index first = -1;
  for (Eigen::Index i = 0; i < n && first < 0; ++i)
    if (std::abs(w[i]) > eps_tie) first = i;
  if (first < 0) return {0, true};
  if (!periodic && (std::abs(w[0]) <= eps_tie || std::abs(w[n - 1]) <= eps_tie))
    throw DomainError("count_intersections: intersection at the boundary");

  IntersectionCount r;
  int prev = w[first] > 0 ? 1 : -1;
  const Eigen::Index span = periodic ? n : n - first - 1;
  for (Eigen::Index k = 1; k <= span; ++k) {
    const Eigen::Index i = periodic ? (first + k) % n : first + k;
    if (std::abs(w[i]) <= eps_tie) continue;
    const int s = w[i] > 0 ? 1 : -1;
    if (s != prev) ++r.count;
    prev = s;
  }
  return r;
}

VerificationReport intersection_monotonicity(const Trajectory& u, const Trajectory& phi, double eps_tie) {
  if (u.size() != phi.size()) throw GridMismatch("intersection_monotonicity: snapshot counts differ");
  std::vector<int> counts;
  bool degenerate = false;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (std::abs(u.snapshots[k].time() - phi.snapshots[k].time()) > 1e-12 * std::max(1.0, u.snapshots[k].time()))
      throw GridMismatch("intersection_monotonicity: snapshot times differ");
    const auto c = count_intersections(u.snapshots[k], phi.snapshots[k], eps_tie);
    counts.push_back(c.count);
    degenerate = degenerate || c.degenerate;
  }
  double worst = counts.size() > 1 ? -kInf : 0.0;
  double t_worst = u.front().time();
  for (std::size_t k = 1; k < counts.size(); ++k) {
    const double d = counts[k] - counts[k - 1];
    if (d > worst) {
      worst = d;
      t_worst = u.snapshots[k].time();
    }
  }
  return VerificationReport::make("intersection_monotonicity", worst, 0.0, Witness{{}, t_worst, {}},
                                  {{"counts", counts}, {"eps_tie", eps_tie}, {"degenerate", degenerate}});
}

double heat_gradient_bound(double u, double t, double M, double dist, double c) {
  const double N = M / std::erf(std::sqrt(c) * dist / (2.0 * std::sqrt(t)));
  if (std::abs(u) >= N) return 0.0;
  const double iv = inverf(u / N);
  return 2.0 * N * std::sqrt(c / (kPi * t)) * std::exp(-iv * iv);
}

VerificationReport heat_zero_counting_gradient(const Trajectory& traj, double M, double c, TimeWindow window,
                                               double rel_tol) {
  const Grid1D& g = line_of(traj, "heat_zero_counting_gradient");
  if (g.periodic()) throw DomainError("heat_zero_counting_gradient: needs a bounded interval");
  const Eigen::VectorXd x = g.coordinates();
  double worst = -kInf;
  Witness wit;
  int used = 0, skipped = 0;
  for (const Field& snap : traj.snapshots) {
    const double t = snap.time();
    if (!(t > 0.0) || !window.contains(t)) continue;
    if (max_abs(snap) > M * (1.0 + 1e-12)) throw DomainError("heat_zero_counting_gradient: |u| <= M violated");
    ++used;
    const Eigen::VectorXd ux = derivative(snap.grid(), snap.values(), 0);
    for (Eigen::Index i = 1; i + 1 < x.size(); ++i) {
      const double dist = std::min(x[i] - g.x_lo(), g.x_hi() - x[i]);
      const double b = heat_gradient_bound(snap[i], t, M, dist, c);
      // saturated nodes: u equals the cap to rounding and the bound degenerates
      const double N = M / std::erf(std::sqrt(c) * dist / (2.0 * std::sqrt(t)));
      if (!(b > 0.0) || std::abs(snap[i]) >= (1.0 - 1e-6) * N) {
        ++skipped;
        continue;
      }
      const double d = (ux[i] - b) / b;
      if (d > worst) {
        worst = d;
        wit = Witness{{x[i]}, t, {snap[i], ux[i], b}};
      }
    }
  }
  if (used == 0) throw DomainError("heat_zero_counting_gradient: no snapshot inside the time window");
  return VerificationReport::make("heat_zero_counting", worst, rel_tol, wit,
                                  {{"M", M}, {"c", c}, {"window", window_json(window)}, {"snapshots", used}, {"saturated", skipped}});
}

VerificationReport barrier_family_gradient(const Trajectory& traj, const Quasilinear1D& flow, double M,
                                           const BarrierFamilyOptions& opt) {
  const Grid1D& g = line_of(traj, "barrier_family_gradient");
  const double h = g.spacing();
  const Eigen::VectorXd x = g.coordinates();
  const double H = opt.height_factor * M;
  const double W = opt.half_width > 0.0 ? opt.half_width : 2.0 * g.length();
  const double hb = h / std::max(1, opt.refine);
  const int cells = 2 * static_cast<int>(std::ceil(W / hb));
  const Grid1D bg(-W, W, cells, Topology::bounded);
  const double hbe = bg.spacing();
  const Field b0 = sample1d(bg, [H, hbe](double y) { return H * std::clamp(y / hbe, -1.0, 1.0); });

  std::vector<double> times;
  for (const Field& s : traj.snapshots)
    if (s.time() > 0.0) times.push_back(s.time());
  if (times.empty()) throw DomainError("barrier_family_gradient: no positive snapshot times");
  TimeStepPlan plan;
  plan.t_end = times.back();
  const Trajectory bar = evolve(flow, b0, BoundaryCondition::neumann_zero(), plan, times);

  std::vector<int> probes = opt.probes;
  if (probes.empty()) {
    const int lo = g.periodic() ? 0 : 1, hi = g.periodic() ? g.node_count() : g.node_count() - 1;
    for (int i = lo; i < hi; ++i) probes.push_back(i);
  }
  const double abs_tol = opt.abs_tol >= 0.0 ? opt.abs_tol : 10.0 * h;

  double worst = -kInf;
  Witness wit;
  int checked = 0, inconclusive = 0;
  std::size_t bk = 1;
  for (const Field& snap : traj.snapshots) {
    const double t = snap.time();
    if (!(t > 0.0)) continue;
    const Field& bs = bar.snapshots[bk++];
    if (!opt.window.contains(t)) continue;
    const Eigen::VectorXd& bv = bs.values();
    const Eigen::VectorXd bx = derivative(bs.grid(), bv, 0);
    const Eigen::VectorXd ux = derivative(snap.grid(), snap.values(), 0);
    for (int i : probes) {
      if (!g.periodic()) {
        const double d = std::min(x[i] - g.x_lo(), g.x_hi() - x[i]);
        if (t > opt.window_c * d * d / flow.Lambda_of_K(opt.window_c * M / d)) continue;
      }
      const double u = snap[i];
      const auto it = std::upper_bound(bv.data(), bv.data() + bv.size(), u);
      const Eigen::Index j = (it - bv.data()) - 1;
      if (j < 0 || j + 1 >= bv.size() || !(bv[j + 1] > bv[j])) {
        ++inconclusive;
        continue;
      }
      const double th = (u - bv[j]) / (bv[j + 1] - bv[j]);
      const double slope = (1.0 - th) * bx[j] + th * bx[j + 1];
      const double y = bg.coordinate(static_cast<int>(j)) + th * hbe;
      ++checked;
      const double d = ux[i] - (1.0 + opt.rel_tol) * slope;
      if (d > worst) {
        worst = d;
        wit = Witness{{x[i]}, t, {u, ux[i], slope, x[i] - y}};
      }
    }
  }
  if (checked == 0) worst = 0.0;
  return VerificationReport::make("barrier_family", worst, abs_tol, wit,
                                  {{"flow", flow.id},
                                   {"M", M},
                                   {"height", H},
                                   {"checked", checked},
                                   {"inconclusive", inconclusive},
                                   {"window", window_json(opt.window)},
                                   {"window_c", opt.window_c},
                                   {"barrier_grid", to_json(GridND(bg))},
                                   {"rel_tol", opt.rel_tol}});
}

Field gradient_function(const Field& u) {
  const VectorField du = gradient(u);
  Eigen::VectorXd v = (1.0 + du.values.colwise().squaredNorm().array()).sqrt().matrix().transpose();
  return Field(u.grid(), std::move(v), u.time());
}

VerificationReport eh_bound_check(const Trajectory& traj, double M, const eh::Kind& kind, TimeWindow window,
                                  double tol) {
  if (traj.snapshots.empty()) throw DomainError("eh_bound_check: empty trajectory");
  const GridND& g = traj.front().grid();
  const int n = g.dim();
  if (tol < 0.0) tol = 10.0 * min_spacing(g);
  const auto* per = std::get_if<eh::Periodic>(&kind);
  const auto* in = std::get_if<eh::Interior>(&kind);
  if (in && in->center.size() != n) throw DomainError("eh_bound_check: ball center has the wrong dimension");

  double worst = -kInf;
  Witness wit;
  long probed = 0;
  for (const Field& snap : traj.snapshots) {
    const double t = snap.time();
    if (!(t > 0.0) || !window.contains(t)) continue;
    const Field v = gradient_function(snap);
    for (Eigen::Index k = 0; k < g.node_count(); ++k) {
      const double u = snap[k];
      double log_bound;
      if (per) {
        log_bound = 0.5 * std::log(t) + per->c * std::pow(std::abs(u) - 2.0 * M, 2) / (4.0 * t);
      } else {
        const Eigen::VectorXd x = g.coordinates(k);
        const double room = in->R * in->R - 2.0 * n * t - (x - in->center).squaredNorm();
        if (!(room > 0.0)) continue;
        const double eta = room + u * u;
        log_bound = 0.5 * in->q * std::log(t) + in->c * in->q * std::pow(u + 2.0 * M, 2) / (4.0 * t) - std::log(eta);
      }
      ++probed;
      if (log_bound > 700.0) continue;
      const double b = std::exp(log_bound);
      if (v[k] - b > worst) {
        worst = v[k] - b;
        const Eigen::VectorXd x = g.coordinates(k);
        wit = Witness{std::vector<double>(x.data(), x.data() + x.size()), t, {v[k], b, u}};
      }
    }
  }
  if (!std::isfinite(worst)) worst = -1.0;  // every probed bound is astronomically large
  nlohmann::json meta = {{"M", M}, {"window", window_json(window)}, {"probed", probed}};
  if (per) {
    meta["kind"] = "periodic";
    meta["c"] = per->c;
  } else {
    meta["kind"] = "interior";
    meta["R"] = in->R;
    meta["q"] = in->q;
    meta["c"] = in->c;
  }
  return VerificationReport::make(per ? "eh_periodic" : "eh_interior", worst, tol, wit, meta);
}

VerificationReport convergence_to_initial_data(const Trajectory& traj, const ModulusOfContinuity& omega, double tol) {
  if (traj.snapshots.empty()) throw DomainError("convergence_to_initial_data: empty trajectory");
  const GridND& g = traj.front().grid();
  const int n = g.dim();
  if (tol < 0.0) tol = 10.0 * min_spacing(g);
  std::vector<bool> interior(g.node_count(), true);
  for (Eigen::Index k = 0; k < g.node_count(); ++k) {
    const auto idx = g.multi_index(k);
    for (int a = 0; a < n; ++a) {
      const Grid1D& ax = g.axis(a);
      if (!ax.periodic() && (idx[a] == 0 || idx[a] == ax.node_count() - 1)) interior[k] = false;
    }
  }
  const Eigen::VectorXd& u0 = traj.front().values();
  double worst = -kInf;
  Witness wit;
  std::vector<double> ts, disp, bounds;
  for (const Field& snap : traj.snapshots) {
    const double t = snap.time() - traj.front().time();
    double sup = 0.0;
    Eigen::Index arg = 0;
    for (Eigen::Index k = 0; k < g.node_count(); ++k) {
      if (!interior[k]) continue;
      const double d = std::abs(snap[k] - u0[k]);
      if (d > sup) {
        sup = d;
        arg = k;
      }
    }
    const double r = std::sqrt(2.0 * n * t);
    const double b = r + omega.omega(r);
    ts.push_back(t);
    disp.push_back(sup);
    bounds.push_back(b);
    if (sup - b > worst) {
      worst = sup - b;
      const Eigen::VectorXd x = g.coordinates(arg);
      wit = Witness{std::vector<double>(x.data(), x.data() + x.size()), snap.time(), {sup, b}};
    }
  }
  return VerificationReport::make("convergence_to_initial_data", worst, tol, wit,
                                  {{"times", ts}, {"displacement", disp}, {"bound", bounds}});
}

double fit_power_law(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw DomainError("fit_power_law: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double a = std::log(t[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++m;
  }
  if (m < 2) throw DomainError("fit_power_law: need two positive samples");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double calibrate(const std::function<bool(double)>& passes, double lo, double hi, double rel_tol) {
  if (!(lo > 0.0) || !(hi > lo)) throw DomainError("calibrate: need 0 < lo < hi");
  if (!passes(hi)) return std::numeric_limits<double>::quiet_NaN();
  if (passes(lo)) return lo;
  while (hi / lo > 1.0 + rel_tol) {
    const double mid = std::sqrt(lo * hi);
    (passes(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace parablab
