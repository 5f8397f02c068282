#include "parablab/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parablab/errors.hpp"
#include "parablab/optimize.hpp"

namespace parablab {

const std::string& flow_id(const Flow& f) {
  return std::visit([](const auto& x) -> const std::string& { return x.id; }, f);
}

int flow_dimension(const Flow& f) {
  if (const auto* g = std::get_if<GraphFlowND>(&f)) return g->n;
  return 1;
}

Eigen::MatrixXd mcf_coefficients(const Eigen::VectorXd& p) {
  const Eigen::Index n = p.size();
  return Eigen::MatrixXd::Identity(n, n) - p * p.transpose() / (1.0 + p.squaredNorm());
}

GraphFlowND mcf_graph(int n) {
  if (n < 1) throw DomainError("mcf_graph: n must be >= 1");
  GraphFlowND f;
  f.id = n == 1 ? "mcf1d" : "mcf" + std::to_string(n) + "d";
  f.n = n;
  f.coeff = mcf_coefficients;
  f.Lambda_of_K = [](double) { return 1.0; };
  return f;
}

Quasilinear1D heat_1d(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("heat_1d: c must be positive");
  const double a = 1.0 / (4.0 * c);
  Quasilinear1D f;
  f.id = "heat";
  f.a = [a](double, double, double, double) { return a; };
  f.P = 1.0;
  f.A = a;
  f.lambda_of_K = [a](double) { return a; };
  f.Lambda_of_K = [a](double) { return a; };
  f.flux = [a](double p) { return a * p; };
  return f;
}

Quasilinear1D csf() {
  Quasilinear1D f;
  f.id = "csf";
  f.a = [](double p, double, double, double) { return 1.0 / (1.0 + p * p); };
  f.A = 0.5;
  f.P = 1.0;
  f.lambda_of_K = [](double K) { return 1.0 / (1.0 + K * K); };
  f.Lambda_of_K = [](double) { return 1.0; };
  f.flux = [](double p) { return std::atan(p); };
  return f;
}

Quasilinear1D plaplace_reg(double q, double eps) {
  if (!(eps > 0.0)) throw DomainError("plaplace_reg: eps must be positive");
  const double e = (q - 2.0) / 2.0;
  auto a = [eps, e](double p) { return std::pow(eps * eps + p * p, e); };
  Quasilinear1D f;
  f.id = "plaplace-reg";
  f.a = [a](double p, double, double, double) { return a(p); };
  f.P = 1.0;
  // a p^2 is increasing in |p| for q >= 0, so its infimum over |p| >= 1 sits at p = 1
  f.A = a(1.0);
  if (q < 2.0) {
    f.lambda_of_K = [a](double K) { return a(K); };
    f.Lambda_of_K = [a](double) { return a(0.0); };
  } else {
    f.lambda_of_K = [a](double) { return a(0.0); };
    f.Lambda_of_K = [a](double K) { return a(K); };
  }
  if (q == 2.0) f.flux = [](double p) { return p; };
  return f;
}

FullyNonlinear1D sine_fully_nonlinear() {
  FullyNonlinear1D f;
  f.id = "fn-sine";
  f.F = [](double r, double p, double, double, double) { return (r + 0.5 * std::sin(r)) / (1.0 + p * p); };
  f.dF_dr = [](double r, double p, double, double, double) {
    return (1.0 + 0.5 * std::cos(r)) / (1.0 + p * p);
  };
  f.p_sensitivity = 0.0;
  f.Lambda_of_K = [](double) { return 1.5; };
  return f;
}

DegeneracyProfile mcf_profile() {
  return {[](double s) { return 1.0 / (1.0 + s * s); }, 0.5, 1.0};
}

DegeneracyProfile heat_profile(double c) {
  if (!(c > 0.0)) throw DomainError("heat_profile: c must be positive");
  const double a = 1.0 / (4.0 * c);
  return {[a](double) { return a; }, a, 1.0};
}

namespace {

Eigen::VectorXd direction_from_angles(const Eigen::VectorXd& ang, int n) {
  Eigen::VectorXd v(n);
  if (n == 2) {
    v << std::cos(ang[0]), std::sin(ang[0]);
  } else {
    v << std::sin(ang[1]) * std::cos(ang[0]), std::sin(ang[1]) * std::sin(ang[0]), std::cos(ang[1]);
  }
  return v;
}

Eigen::VectorXd angles_from_direction(const Eigen::VectorXd& v) {
  if (v.size() == 2) return Eigen::VectorXd::Constant(1, std::atan2(v[1], v[0]));
  Eigen::VectorXd a(2);
  a << std::atan2(v[1], v[0]), std::acos(std::clamp(v[2], -1.0, 1.0));
  return a;
}

}  // namespace

double alpha(const Eigen::MatrixXd& A, const Eigen::VectorXd& p, int n_dirs) {
  const int n = static_cast<int>(p.size());
  if (A.rows() != n || A.cols() != n) throw DomainError("alpha: matrix and vector sizes differ");
  const double pn = p.norm();
  if (!(pn > 0.0)) throw DomainError("alpha: p must be nonzero");
  if (n == 1) return A(0, 0);

  const Eigen::VectorXd ph = p / pn;
  const double cut = 1e-9;
  auto ratio = [&](const Eigen::VectorXd& v) {
    const double vp = v.dot(ph);
    if (std::abs(vp) < cut) return std::numeric_limits<double>::infinity();
    return v.dot(A * v) / (vp * vp);
  };

  const Eigen::MatrixXd dirs = sphere_directions(n, n_dirs);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(dirs.cols());
  for (Eigen::Index k = 0; k < dirs.cols(); ++k) scored.emplace_back(ratio(dirs.col(k)), static_cast<int>(k));
  const int keep = std::min<int>(8, static_cast<int>(scored.size()));
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end());

  double best = scored.front().first;
  NelderMeadOptions opts;
  opts.initial_step = 0.02;
  opts.x_tol = 1e-13;
  opts.f_tol = 1e-16;
  for (int i = 0; i < keep; ++i) {
    const Eigen::VectorXd start = angles_from_direction(dirs.col(scored[i].second));
    const Minimum m = nelder_mead(
        [&](const Eigen::VectorXd& ang) { return ratio(direction_from_angles(ang, n)); }, start, opts);
    best = std::min(best, m.value);
  }
  return best;
}

double alpha_closed_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& p) {
  const double pn2 = p.squaredNorm();
  if (!(pn2 > 0.0)) throw DomainError("alpha_closed_form: p must be nonzero");
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw DomainError("alpha_closed_form: matrix is not positive definite");
  return pn2 / p.dot(llt.solve(p));
}

double bernstein_E(const Eigen::MatrixXd& A, const Eigen::VectorXd& p) { return p.dot(A * p); }

VerificationReport check_degeneracy(const DegeneracyProfile& profile, const std::vector<double>& s_samples) {
  if (s_samples.empty()) throw DomainError("check_degeneracy: empty sample set");
  double worst = std::numeric_limits<double>::infinity();
  double arg = s_samples.front();
  for (double s : s_samples) {
    const double margin = profile.alpha_tilde(s) * s * s - profile.A0;
    if (margin < worst) {
      worst = margin;
      arg = s;
    }
  }
  const auto [lo, hi] = std::minmax_element(s_samples.begin(), s_samples.end());
  nlohmann::json meta = {{"A0", profile.A0},
                         {"P", profile.P},
                         {"min_margin", worst},
                         {"argmin_s", arg},
                         {"s_range", {*lo, *hi}},
                         {"samples", s_samples.size()}};
  return VerificationReport::make("degeneracy", -worst, 0.0,
                                  Witness{{arg}, 0.0, {profile.alpha_tilde(arg) * arg * arg}}, meta);
}

VerificationReport check_metadata(const Quasilinear1D& flow, double p_max, int samples) {
  double defect = -std::numeric_limits<double>::infinity();
  Witness witness;
  auto record = [&](double d, double p, double a) {
    if (d > defect) {
      defect = d;
      witness = Witness{{p}, 0.0, {a}};
    }
  };
  const std::vector<double> ks = {flow.P, 10.0 * flow.P, p_max};
  for (double p : linspace(-p_max, p_max, samples)) {
    const double a = flow.a(p, 0.0, 0.0, 0.0);
    record(-a, p, a);
    if (std::abs(p) >= flow.P) record(flow.A - a * p * p, p, a);
    for (double K : ks) {
      if (std::abs(p) > K) continue;
      record(flow.lambda_of_K(K) - a, p, a);
      record(a - flow.Lambda_of_K(K), p, a);
    }
  }
  const double tol = 1e-12 * std::max(1.0, flow.A);
  return VerificationReport::make("metadata:" + flow.id, defect, tol, witness,
                                  {{"A", flow.A}, {"P", flow.P}, {"p_max", p_max}, {"samples", samples}});
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0.0)) throw DomainError("logspace: lo must be positive");
  std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
  for (double& x : v) x = std::exp(x);
  return v;
}

}  // namespace parablab
