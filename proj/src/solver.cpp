#include "parablab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "parablab/errors.hpp"
#include "parablab/quadrature.hpp"
#include "parablab/selling.hpp"

namespace parablab {

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const auto& s : snapshots) t.push_back(s.time());
  return t;
}

namespace {

const GaussLegendre& flux_rule() {
  static const GaussLegendre rule(8);
  return rule;
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Even reflection about both end nodes of a bounded axis with n nodes.
int reflect(int i, int n) {
  const int period = 2 * (n - 1);
  i = wrap(i, period);
  return i < n ? i : period - i;
}

class Stepper {
 public:
  virtual ~Stepper() = default;
  /// Largest admissible dt for state u; may cache per-step data for advance().
  virtual double prepare(const Eigen::VectorXd& u, double t) = 0;
  virtual void advance(Eigen::VectorXd& u, double t, double dt) = 0;
};

void check_topology(const GridND& grid, const BoundaryCondition& bc) {
  bool bounded = false;
  for (const auto& a : grid.axes()) bounded = bounded || !a.periodic();
  if (bc.kind == BoundaryKind::periodic && bounded)
    throw DomainError("evolve: periodic boundary condition on a bounded grid axis");
  if (bc.kind != BoundaryKind::periodic && !bounded)
    throw DomainError("evolve: boundary condition needs a bounded grid axis");
  if (bc.kind == BoundaryKind::dirichlet && !bc.value)
    throw DomainError("evolve: dirichlet condition without boundary values");
}

// ---------------------------------------------------------------------------
// One space dimension: conservative flux form for quasilinear operators, plain
// three-point stencils for fully nonlinear ones.

class LineStepper : public Stepper {
 public:
  LineStepper(const Grid1D& g, const BoundaryCondition& bc, const TimeStepPlan& plan)
      : g_(g), bc_(bc), plan_(plan), n_(g.node_count()), h_(g.spacing()), x_(g.coordinates()) {
    lo_ = bc.kind == BoundaryKind::dirichlet ? 1 : 0;
    hi_ = bc.kind == BoundaryKind::dirichlet ? n_ - 1 : n_;
  }

 protected:
  double left(const Eigen::VectorXd& u, int i) const {
    if (i > 0) return u[i - 1];
    return g_.periodic() ? u[n_ - 1] : u[1];
  }
  double right(const Eigen::VectorXd& u, int i) const {
    if (i + 1 < n_) return u[i + 1];
    return g_.periodic() ? u[0] : u[n_ - 2];
  }
  double max_slope(const Eigen::VectorXd& u) const {
    double k = 0.0;
    for (int i = 0; i < n_; ++i) k = std::max(k, std::abs(right(u, i) - u[i]) / h_);
    if (!(k <= plan_.max_grad_clip)) {
      std::ostringstream os;
      os << "gradient " << k << " exceeds the probe cap " << plan_.max_grad_clip;
      throw SolverAbort(os.str());
    }
    return k;
  }
  void apply_boundary(Eigen::VectorXd& u, double t) const {
    if (bc_.kind != BoundaryKind::dirichlet) return;
    u[0] = bc_.value(Eigen::VectorXd::Constant(1, x_[0]), t);
    u[n_ - 1] = bc_.value(Eigen::VectorXd::Constant(1, x_[n_ - 1]), t);
  }

  Grid1D g_;
  BoundaryCondition bc_;
  TimeStepPlan plan_;
  int n_;
  double h_;
  Eigen::VectorXd x_;
  int lo_ = 0;
  int hi_ = 0;
  Eigen::VectorXd next_;
};

class QuasilinearStepper : public LineStepper {
 public:
  QuasilinearStepper(Quasilinear1D f, const Grid1D& g, const BoundaryCondition& bc, const TimeStepPlan& plan)
      : LineStepper(g, bc, plan), f_(std::move(f)) {}

  double prepare(const Eigen::VectorXd& u, double) override {
    const double lam = f_.Lambda_of_K(max_slope(u));
    return plan_.cfl_safety * h_ * h_ / (2.0 * lam);
  }

  void advance(Eigen::VectorXd& u, double t, double dt) override {
    next_ = u;
    for (int i = lo_; i < hi_; ++i) {
      const double dp = (right(u, i) - u[i]) / h_;
      const double dm = (u[i] - left(u, i)) / h_;
      double diff;
      if (f_.flux) {
        diff = f_.flux(dp) - f_.flux(dm);
      } else {
        const double q = u[i], x = x_[i];
        diff = flux_rule().integrate([&](double p) { return f_.a(p, q, x, t); }, dm, dp);
      }
      next_[i] = u[i] + dt / h_ * diff;
      if (f_.b) next_[i] += dt * f_.b(0.5 * (dp + dm));
    }
    u.swap(next_);
    apply_boundary(u, t + dt);
  }

 private:
  Quasilinear1D f_;
};

class FullyNonlinearStepper : public LineStepper {
 public:
  FullyNonlinearStepper(FullyNonlinear1D f, const Grid1D& g, const BoundaryCondition& bc,
                        const TimeStepPlan& plan)
      : LineStepper(g, bc, plan), f_(std::move(f)) {}

  double prepare(const Eigen::VectorXd& u, double) override {
    const double lam = f_.Lambda_of_K(max_slope(u));
    double dt = plan_.cfl_safety * h_ * h_ / (2.0 * lam);
    return dt;
  }

  void advance(Eigen::VectorXd& u, double t, double dt) override {
    next_ = u;
    for (int i = lo_; i < hi_; ++i) {
      const double l = left(u, i), r = right(u, i);
      const double uxx = (r - 2.0 * u[i] + l) / (h_ * h_);
      const double ux = (r - l) / (2.0 * h_);
      next_[i] = u[i] + dt * f_.F(uxx, ux, u[i], x_[i], t);
    }
    u.swap(next_);
    apply_boundary(u, t + dt);
  }

 private:
  FullyNonlinear1D f_;
};

// ---------------------------------------------------------------------------
// Two and three space dimensions: the coefficient matrix, scaled to index space,
// is split into nonnegative multiples of lattice second differences.

template <int N>
class LatticeStepper : public Stepper {
 public:
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  LatticeStepper(GraphFlowND f, const GridND& g, const BoundaryCondition& bc, const TimeStepPlan& plan)
      : f_(std::move(f)), g_(g), bc_(bc), plan_(plan) {
    const Eigen::Index m = g.node_count();
    index_.resize(m);
    boundary_.assign(m, false);
    for (Eigen::Index k = 0; k < m; ++k) {
      index_[k] = g.multi_index(k);
      if (bc.kind == BoundaryKind::dirichlet) {
        for (int a = 0; a < N; ++a) {
          const Grid1D& ax = g.axis(a);
          if (!ax.periodic() && (index_[k][a] == 0 || index_[k][a] == ax.node_count() - 1)) boundary_[k] = true;
        }
      }
    }
    for (int a = 0; a < N; ++a) inv_h_[a] = 1.0 / g.axis(a).spacing();
    stencils_.resize(m);
    drift_.resize(m);
  }

  double prepare(const Eigen::VectorXd& u, double) override {
    double worst = 0.0, kmax = 0.0;
    for (Eigen::Index k = 0; k < g_.node_count(); ++k) {
      Vec p;
      for (int a = 0; a < N; ++a) {
        p[a] = (neighbor(u, k, unit(a, 1)) - neighbor(u, k, unit(a, -1))) * 0.5 * inv_h_[a];
      }
      kmax = std::max(kmax, p.cwiseAbs().maxCoeff());
      if (boundary_[k]) continue;
      const Mat A = f_.coeff(p);
      Mat D;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) D(i, j) = A(i, j) * inv_h_[i] * inv_h_[j];
      stencils_[k] = selling_decomposition<N>(D);
      double total = 0.0;
      for (const auto& s : stencils_[k]) total += s.weight;
      worst = std::max(worst, total);
      drift_[k] = f_.b ? f_.b(p) : 0.0;
    }
    if (!(kmax <= plan_.max_grad_clip)) {
      std::ostringstream os;
      os << "gradient " << kmax << " exceeds the probe cap " << plan_.max_grad_clip;
      throw SolverAbort(os.str());
    }
    if (worst <= 0.0) return std::numeric_limits<double>::infinity();
    return plan_.cfl_safety / (2.0 * worst);
  }

  void advance(Eigen::VectorXd& u, double t, double dt) override {
    next_ = u;
    for (Eigen::Index k = 0; k < g_.node_count(); ++k) {
      if (boundary_[k]) {
        next_[k] = bc_.value(g_.coordinates(k), t + dt);
        continue;
      }
      double lap = 0.0;
      for (const auto& s : stencils_[k]) {
        lap += s.weight * (neighbor(u, k, s.offset) - 2.0 * u[k] + neighbor(u, k, (-s.offset).eval()));
      }
      next_[k] = u[k] + dt * (lap + drift_[k]);
    }
    u.swap(next_);
  }

 private:
  using Offset = Eigen::Matrix<int, N, 1>;

  static Offset unit(int a, int s) {
    Offset o = Offset::Zero();
    o[a] = s;
    return o;
  }

  double neighbor(const Eigen::VectorXd& u, Eigen::Index k, const Offset& off) const {
    GridND::MultiIndex idx = index_[k];
    for (int a = 0; a < N; ++a) {
      const Grid1D& ax = g_.axis(a);
      const int i = idx[a] + off[a];
      idx[a] = ax.periodic() ? wrap(i, ax.node_count()) : reflect(i, ax.node_count());
    }
    return u[g_.flat_index(idx)];
  }

  GraphFlowND f_;
  GridND g_;
  BoundaryCondition bc_;
  TimeStepPlan plan_;
  std::vector<GridND::MultiIndex> index_;
  std::vector<bool> boundary_;
  std::array<double, N> inv_h_{};
  std::vector<std::vector<LatticeStencil<N>>> stencils_;
  std::vector<double> drift_;
  Eigen::VectorXd next_;
};

Quasilinear1D as_quasilinear(const GraphFlowND& f) {
  Quasilinear1D q;
  q.id = f.id;
  auto coeff = f.coeff;
  q.a = [coeff](double p, double, double, double) { return coeff(Eigen::VectorXd::Constant(1, p))(0, 0); };
  if (f.b) {
    auto b = f.b;
    q.b = [b](double p) { return b(Eigen::VectorXd::Constant(1, p)); };
  }
  q.Lambda_of_K = f.Lambda_of_K;
  q.lambda_of_K = [](double) { return 0.0; };
  return q;
}

std::unique_ptr<Stepper> make_stepper(const Flow& flow, const GridND& grid, const BoundaryCondition& bc,
                                      const TimeStepPlan& plan) {
  check_topology(grid, bc);
  const int dim = grid.dim();
  if (flow_dimension(flow) != dim) throw GridMismatch("evolve: flow and grid dimensions differ");
  if (const auto* q = std::get_if<Quasilinear1D>(&flow)) {
    return std::make_unique<QuasilinearStepper>(*q, grid.axis(0), bc, plan);
  }
  if (const auto* fn = std::get_if<FullyNonlinear1D>(&flow)) {
    return std::make_unique<FullyNonlinearStepper>(*fn, grid.axis(0), bc, plan);
  }
  const auto& g = std::get<GraphFlowND>(flow);
  if (dim == 1) return std::make_unique<QuasilinearStepper>(as_quasilinear(g), grid.axis(0), bc, plan);
  if (dim == 2) return std::make_unique<LatticeStepper<2>>(g, grid, bc, plan);
  return std::make_unique<LatticeStepper<3>>(g, grid, bc, plan);
}

std::vector<double> checked_output_times(std::vector<double> out, double t0, const TimeStepPlan& plan) {
  if (!(plan.cfl_safety > 0.0 && plan.cfl_safety < 1.0)) throw DomainError("evolve: cfl_safety must lie in (0,1)");
  if (!(plan.t_end > t0)) throw DomainError("evolve: t_end must exceed the initial time");
  if (out.empty()) out.push_back(plan.t_end);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > t0) || out[i] > plan.t_end) throw DomainError("evolve: output times must lie in (t0, t_end]");
    if (i > 0 && !(out[i] > out[i - 1])) throw DomainError("evolve: output times must increase strictly");
  }
  return out;
}

double initial_scale(const Field& u0) { return std::max(1.0, u0.values().cwiseAbs().maxCoeff()); }

void guard(const Eigen::VectorXd& u, double scale, const TimeStepPlan& plan, double t) {
  const double m = u.cwiseAbs().maxCoeff();
  if (!(m <= plan.blowup_factor * scale)) {
    std::ostringstream os;
    os << "solution blew up at t = " << t << " (max |u| = " << m << ")";
    throw SolverAbort(os.str());
  }
}

void note_dt(StepStats& s, double dt) {
  if (s.steps == 0) {
    s.dt_min = s.dt_max = dt;
  } else {
    s.dt_min = std::min(s.dt_min, dt);
    s.dt_max = std::max(s.dt_max, dt);
  }
  ++s.steps;
}

// Advances time to `target`, clipping the last step so the target is hit exactly.
template <typename DtFn, typename StepFn>
void march(double& t, double target, const TimeStepPlan& plan, DtFn&& dt_fn, StepFn&& step_fn) {
  while (t < target) {
    double dt = dt_fn(t);
    const double remaining = target - t;
    if (dt < plan.dt_floor && remaining > plan.dt_floor) {
      std::ostringstream os;
      os << "time step " << dt << " underflowed at t = " << t;
      throw SolverAbort(os.str());
    }
    const bool last = dt >= remaining;
    if (last) dt = remaining;
    step_fn(t, dt);
    t = last ? target : t + dt;
  }
}

}  // namespace

Trajectory evolve(const Flow& flow, const Field& u0, const BoundaryCondition& bc, const TimeStepPlan& plan,
                  std::vector<double> output_times) {
  const double t0 = u0.time();
  output_times = checked_output_times(std::move(output_times), t0, plan);
  auto stepper = make_stepper(flow, u0.grid(), bc, plan);
  const double scale = initial_scale(u0);

  Trajectory traj;
  traj.snapshots.push_back(u0);
  Eigen::VectorXd u = u0.values();
  double t = t0;
  for (double target : output_times) {
    march(
        t, target, plan, [&](double tt) { return stepper->prepare(u, tt); },
        [&](double tt, double dt) {
          stepper->advance(u, tt, dt);
          note_dt(traj.stats, dt);
          guard(u, scale, plan, tt + dt);
        });
    traj.snapshots.emplace_back(u0.grid(), u, target);
  }
  return traj;
}

PairResult evolve_pair(const Flow& flow, const Field& u0_first, const Field& u0_second,
                       const BoundaryCondition& bc_first, const BoundaryCondition& bc_second,
                       const TimeStepPlan& plan, std::vector<double> output_times) {
  if (!(u0_first.grid() == u0_second.grid())) throw GridMismatch("evolve_pair: grids differ");
  if (u0_first.time() != u0_second.time()) throw GridMismatch("evolve_pair: initial times differ");
  const double t0 = u0_first.time();
  output_times = checked_output_times(std::move(output_times), t0, plan);
  auto sa = make_stepper(flow, u0_first.grid(), bc_first, plan);
  auto sb = make_stepper(flow, u0_second.grid(), bc_second, plan);
  const double scale = std::max(initial_scale(u0_first), initial_scale(u0_second));

  PairResult r;
  r.first.snapshots.push_back(u0_first);
  r.second.snapshots.push_back(u0_second);
  Eigen::VectorXd a = u0_first.values(), b = u0_second.values();
  r.step_times.push_back(t0);
  r.min_gap.push_back((b - a).minCoeff());
  double t = t0;
  for (double target : output_times) {
    march(
        t, target, plan, [&](double tt) { return std::min(sa->prepare(a, tt), sb->prepare(b, tt)); },
        [&](double tt, double dt) {
          sa->advance(a, tt, dt);
          sb->advance(b, tt, dt);
          note_dt(r.first.stats, dt);
          note_dt(r.second.stats, dt);
          guard(a, scale, plan, tt + dt);
          guard(b, scale, plan, tt + dt);
          r.step_times.push_back(tt + dt);
          r.min_gap.push_back((b - a).minCoeff());
        });
    r.step_times.back() = target;
    r.first.snapshots.emplace_back(u0_first.grid(), a, target);
    r.second.snapshots.emplace_back(u0_second.grid(), b, target);
  }
  return r;
}

PairResult evolve_pair_ordered(const Flow& flow, const Field& u0_low, const Field& u0_high,
                               const BoundaryCondition& bc, const TimeStepPlan& plan,
                               std::vector<double> output_times) {
  if (!(u0_low.grid() == u0_high.grid())) throw GridMismatch("evolve_pair_ordered: grids differ");
  if ((u0_high.values() - u0_low.values()).minCoeff() < 0.0)
    throw DomainError("evolve_pair_ordered: initial data are not ordered");
  return evolve_pair(flow, u0_low, u0_high, bc, bc, plan, std::move(output_times));
}

Quasilinear1D auxiliary_flow(const DegeneracyProfile& profile) {
  Quasilinear1D f;
  f.id = "auxiliary";
  auto at = profile.alpha_tilde;
  f.a = [at](double p, double, double, double) { return 4.0 * at(std::abs(p)); };
  f.A = 4.0 * profile.A0;
  f.P = profile.P;
  // envelopes by sampling |p| in [0, K]
  f.Lambda_of_K = [at](double K) {
    double m = 0.0;
    for (double s : linspace(0.0, K, 257)) m = std::max(m, 4.0 * at(s));
    return m;
  };
  f.lambda_of_K = [at](double K) {
    double m = std::numeric_limits<double>::infinity();
    for (double s : linspace(0.0, K, 257)) m = std::min(m, 4.0 * at(s));
    return m;
  };
  return f;
}

AuxiliaryResult solve_auxiliary_phi(const DegeneracyProfile& profile, const Grid1D& grid,
                                    const TimeStepPlan& plan, std::vector<double> output_times) {
  if (grid.periodic() || grid.x_lo() != 0.0) throw DomainError("solve_auxiliary_phi: grid must be bounded on [0, Z_max]");
  const double h = grid.spacing();
  const Field phi0 = sample1d(grid, [h](double z) { return std::min(1.0, z / (2.0 * h)); });
  const auto bc = BoundaryCondition::dirichlet([&grid](const Eigen::VectorXd& x, double) {
    return x[0] <= grid.x_lo() ? 0.0 : 1.0;
  });
  AuxiliaryResult r;
  r.trajectory = evolve(auxiliary_flow(profile), phi0, bc, plan, std::move(output_times));
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    const Eigen::VectorXd& v = r.trajectory.snapshots[i].values();
    r.slope_at_origin.push_back((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h));
  }
  return r;
}

nlohmann::json manifest(const Flow& flow, const BoundaryCondition& bc, const Trajectory& traj) {
  static constexpr const char* kKinds[] = {"periodic", "dirichlet", "neumann_zero"};
  return {{"flow", flow_id(flow)},
          {"bc", kKinds[static_cast<int>(bc.kind)]},
          {"grid", to_json(traj.front().grid())},
          {"dt", {{"steps", traj.stats.steps}, {"min", traj.stats.dt_min}, {"max", traj.stats.dt_max}}},
          {"output_times", traj.times()}};
}

}  // namespace parablab
