#include "parablab/report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace parablab {

VerificationReport VerificationReport::make(std::string id, double max_defect, double tolerance,
                                            Witness witness, nlohmann::json metadata) {
  VerificationReport r;
  r.check_id = std::move(id);
  r.max_defect = max_defect;
  r.tolerance = tolerance;
  r.passed = max_defect <= tolerance;
  r.witness = std::move(witness);
  r.metadata = std::move(metadata);
  return r;
}

namespace {

// JSON has no infinities; keep them readable instead of null.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json w = {{"point", r.witness.point}, {"time", number(r.witness.time)}};
  nlohmann::json vals = nlohmann::json::array();
  for (double v : r.witness.values) vals.push_back(number(v));
  w["values"] = vals;
  return {{"check_id", r.check_id},       {"max_defect", number(r.max_defect)},
          {"tolerance", number(r.tolerance)}, {"passed", r.passed},
          {"witness", w},                 {"metadata", r.metadata}};
}

void write_summary(const std::vector<VerificationReport>& reports, std::ostream& os) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::left << std::setw(36) << "check" << std::right << std::setw(14) << "max_defect"
     << std::setw(14) << "tolerance" << std::setw(8) << "result" << '\n';
  os << std::string(72, '-') << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(36) << r.check_id << std::right << std::scientific
       << std::setprecision(4) << std::setw(14) << r.max_defect << std::setw(14) << r.tolerance
       << std::setw(8) << (r.passed ? "PASS" : "FAIL") << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace parablab
