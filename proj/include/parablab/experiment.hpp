#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parablab/config.hpp"
#include "parablab/fields.hpp"
#include "parablab/flows.hpp"
#include "parablab/report.hpp"
#include "parablab/solver.hpp"
#include "parablab/verify.hpp"

namespace parablab {

using InitialData = std::function<double(const Eigen::VectorXd&)>;

/// Catalog lookups used by configs. All failures are ValidationErrors naming the field.
Flow make_flow(const Config& cfg, int grid_dim);
GridND make_grid(const Config& cfg);
/// Initial data from the keys under `prefix` (e.g. "initial" or "check.x.other").
InitialData make_initial(const Config& cfg, const std::string& prefix, const GridND& grid);
BoundaryCondition make_bc(const Config& cfg, const InitialData& u0);
TimeStepPlan make_plan(const Config& cfg);
std::vector<double> make_output_times(const Config& cfg);

struct RunOptions {
  std::string out_dir;                  // empty: no files are written
  std::optional<std::uint64_t> seed;    // overrides the config seed
  bool assert_checks = true;            // false: report-only
  bool write_fields = true;
};

struct CheckOutcome {
  std::string name;
  std::string type;
  bool asserted = true;
  VerificationReport report;
};

struct RunResult {
  std::string name;
  Trajectory trajectory;
  std::vector<CheckOutcome> checks;
  nlohmann::json manifest;
  /// 1 when an asserted check failed, else 0.
  int exit_code() const;
};

/// Validates every section and check without integrating.
void validate_config(const Config& cfg);
RunResult run_experiment(const Config& cfg, const RunOptions& opt = {});

struct SweepAxis {
  std::string path;
  std::vector<std::string> values;
};

/// "path=v1,v2;path2=w1,w2" -> Cartesian product axes.
std::vector<SweepAxis> parse_sweep_grid(const std::string& spec);

/// One CSV row per grid point with max_defect, tolerance, passed and metric per check;
/// runs go to out_dir/run-<k>.
/// Returns the largest exit code over the runs.
int run_sweep(const Config& cfg, const std::vector<SweepAxis>& axes, const RunOptions& opt, int threads,
              std::ostream& csv);

/// Crenellated data of height 1 and half-period R on the periodic interval [0, 2R],
/// mollified over eps_cells grid cells, evolved up to t_end.
Trajectory crenellated_reference(const Quasilinear1D& flow, int cells, double eps_cells, double R, double t_end,
                                 int snapshots = 60);

struct DoubleCoordinateCalibration {
  double c = 0.0;        // NaN when even c_hi fails
  double T_prime = 0.0;  // 2 c M^2 / 3
  double M = 0.0;
  VerificationReport report;
};

/// Smallest c in [c_lo, c_hi] for which the double-coordinate defect passes on
/// (0, 2 c M^2 / 3]. M is the oscillation bound of the data.
DoubleCoordinateCalibration calibrate_double_coordinate(const Trajectory& traj, double M, double c_lo = 1.0 / 64,
                                                        double c_hi = 1.0);

/// Certificate for a norm id (Finsler constants) or a 1-D flow id (double-coordinate calibration).
nlohmann::json certify_id(const std::string& id, int dim = 2, std::uint64_t seed = 1);

/// Human-readable listing of flows, norms, initial data, boundary conditions and checks.
std::string catalog_listing();

}  // namespace parablab
