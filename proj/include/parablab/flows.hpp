#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "parablab/report.hpp"

namespace parablab {

/// u_t = a(u_x, u, x, t) u_xx + b(u_x).
struct Quasilinear1D {
  std::string id;
  std::function<double(double p, double q, double x, double t)> a;
  std::function<double(double p)> b;  // empty means b = 0
  double A = 0.0;
  double P = 1.0;
  std::function<double(double K)> lambda_of_K;
  std::function<double(double K)> Lambda_of_K;
  /// Antiderivative of a in p when a depends on p alone; empty otherwise.
  std::function<double(double p)> flux;
};

/// u_t = F(u_xx, u_x, u, x, t) with dF/dr > 0.
struct FullyNonlinear1D {
  std::string id;
  std::function<double(double r, double p, double q, double x, double t)> F;
  std::function<double(double r, double p, double q, double x, double t)> dF_dr;
  /// Bound on |dF/dp| / dF/dr used for the upwinding condition; 0 when F ignores p.
  double p_sensitivity = 0.0;
  std::function<double(double K)> Lambda_of_K;
};

/// u_t = a^{ij}(Du) u_ij + b(Du) on an n-dimensional grid.
struct GraphFlowND {
  std::string id;
  int n = 1;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& p)> coeff;
  std::function<double(const Eigen::VectorXd& p)> b;  // empty means b = 0
  std::function<double(double K)> Lambda_of_K;
};

/// Radial degeneracy profile alpha(p) = alpha_tilde(|p|).
struct DegeneracyProfile {
  std::function<double(double s)> alpha_tilde;
  double A0 = 0.0;
  double P = 1.0;
};

using Flow = std::variant<Quasilinear1D, FullyNonlinear1D, GraphFlowND>;

const std::string& flow_id(const Flow& f);
int flow_dimension(const Flow& f);

/// Graph mean curvature flow, a(p) = I - p p^T / (1 + |p|^2).
GraphFlowND mcf_graph(int n);
Eigen::MatrixXd mcf_coefficients(const Eigen::VectorXd& p);

/// Heat equation u_t = u_xx / (4c); metadata P = 1, A = 1/(4c).
Quasilinear1D heat_1d(double c);
/// Curve shortening flow u_t = u_xx / (1 + u_x^2); A = 1/2 at P = 1.
Quasilinear1D csf();
/// a(p) = (eps^2 + p^2)^{(q-2)/2}; a p^2 is bounded below for q >= 0 and
/// decays for q < 0, so the degeneracy condition fails there.
Quasilinear1D plaplace_reg(double q, double eps);
/// F(r, p) = (r + sin(r)/2) / (1 + p^2): fully nonlinear, dF/dr in [1/(2(1+p^2)), 3/2].
FullyNonlinear1D sine_fully_nonlinear();

DegeneracyProfile mcf_profile();
DegeneracyProfile heat_profile(double c);

/// alpha(p) = |p|^2 inf_v v^T A v / (v . p)^2 by direction sampling plus
/// simplex refinement. Throws DomainError for p = 0.
double alpha(const Eigen::MatrixXd& A, const Eigen::VectorXd& p, int n_dirs = 4096);
/// |p|^2 / (p^T A^{-1} p) for positive definite A.
double alpha_closed_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& p);

/// E(p) = p^T A p.
double bernstein_E(const Eigen::MatrixXd& A, const Eigen::VectorXd& p);

/// Passes iff alpha_tilde(s) s^2 >= A0 at every sample.
VerificationReport check_degeneracy(const DegeneracyProfile& profile,
                                    const std::vector<double>& s_samples);

/// Sampled consistency check of the catalog metadata: a > 0, a p^2 >= A for
/// |p| >= P and lambda(K) <= a <= Lambda(K) for |p| <= K.
VerificationReport check_metadata(const Quasilinear1D& flow, double p_max = 1e3, int samples = 2001);

/// Evenly spaced samples on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);
/// Logarithmically spaced samples on [lo, hi], lo > 0.
std::vector<double> logspace(double lo, double hi, int n);

}  // namespace parablab
