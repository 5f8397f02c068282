#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace parablab {

/// Worst-case sample of a check.
struct Witness {
  std::vector<double> point;
  double time = 0.0;
  std::vector<double> values;
};

/// Outcome of one estimate check. `passed` is always max_defect <= tolerance.
struct VerificationReport {
  std::string check_id;
  double max_defect = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  Witness witness;
  nlohmann::json metadata = nlohmann::json::object();

  static VerificationReport make(std::string id, double max_defect, double tolerance,
                                 Witness witness = {},
                                 nlohmann::json metadata = nlohmann::json::object());
};

nlohmann::json to_json(const VerificationReport& r);
/// Fixed-width table, one row per report.
void write_summary(const std::vector<VerificationReport>& reports, std::ostream& os);

}  // namespace parablab
