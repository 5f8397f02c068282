#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include <json.hpp>

#include "parablab/fields.hpp"
#include "parablab/flows.hpp"

namespace parablab {

enum class BoundaryKind { periodic, dirichlet, neumann_zero };

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::periodic;
  /// Boundary values for dirichlet, g(x, t).
  std::function<double(const Eigen::VectorXd& x, double t)> value;

  static BoundaryCondition periodic() { return {}; }
  static BoundaryCondition neumann_zero() { return {BoundaryKind::neumann_zero, {}}; }
  static BoundaryCondition dirichlet(std::function<double(const Eigen::VectorXd&, double)> g) {
    return {BoundaryKind::dirichlet, std::move(g)};
  }
};

struct TimeStepPlan {
  double t_end = 1.0;
  double cfl_safety = 0.4;
  double max_grad_clip = 1e5;   // K_cap
  double blowup_factor = 1e6;   // abort when |u| exceeds this times the initial scale
  double dt_floor = 1e-14;
};

struct StepStats {
  long steps = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
};

/// Snapshots at increasing times; the first is the initial data.
struct Trajectory {
  std::vector<Field> snapshots;
  StepStats stats;

  std::vector<double> times() const;
  const Field& front() const { return snapshots.front(); }
  const Field& back() const { return snapshots.back(); }
  std::size_t size() const { return snapshots.size(); }
};

struct PairResult {
  Trajectory first;
  Trajectory second;
  std::vector<double> step_times;  // time after each step, starting with t0
  std::vector<double> min_gap;     // min over nodes of (second - first) at each step_times entry
};

/// Forward-Euler monotone integration. dt is recomputed every step from the
/// current gradient; output times are hit exactly.
Trajectory evolve(const Flow& flow, const Field& u0, const BoundaryCondition& bc,
                  const TimeStepPlan& plan, std::vector<double> output_times = {});

/// Evolves two states with one shared dt sequence and records min(second - first) per step.
PairResult evolve_pair(const Flow& flow, const Field& u0_first, const Field& u0_second,
                       const BoundaryCondition& bc_first, const BoundaryCondition& bc_second,
                       const TimeStepPlan& plan, std::vector<double> output_times = {});

/// Requires u0_low <= u0_high nodewise; `first` is the low solution.
PairResult evolve_pair_ordered(const Flow& flow, const Field& u0_low, const Field& u0_high,
                               const BoundaryCondition& bc, const TimeStepPlan& plan,
                               std::vector<double> output_times = {});

struct AuxiliaryResult {
  Trajectory trajectory;
  std::vector<double> slope_at_origin;  // one-sided phi'(0, t) per snapshot after the first
};

/// phi_t = 4 alpha_tilde(|phi'|) phi'' on [0, Z_max] with phi(0) = 0, phi(Z_max) = 1 and
/// initial data a linear ramp from 0 to 1 over the first two cells.
AuxiliaryResult solve_auxiliary_phi(const DegeneracyProfile& profile, const Grid1D& grid,
                                    const TimeStepPlan& plan, std::vector<double> output_times = {});

/// Quasilinear form of the auxiliary equation.
Quasilinear1D auxiliary_flow(const DegeneracyProfile& profile);

nlohmann::json manifest(const Flow& flow, const BoundaryCondition& bc, const Trajectory& traj);

}  // namespace parablab
