#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "parablab/flows.hpp"
#include "parablab/report.hpp"

namespace parablab {

/// Dense symmetric 3-tensor on R^m.
class Tensor3 {
 public:
  explicit Tensor3(int m = 0) : m_(m), v_(static_cast<std::size_t>(m) * m * m, 0.0) {}
  int size() const noexcept { return m_; }
  double& operator()(int i, int j, int k) { return v_[(i * m_ + j) * m_ + k]; }
  double operator()(int i, int j, int k) const { return v_[(i * m_ + j) * m_ + k]; }
  double contract(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) const;
  /// T(a, ., .) as an m x m matrix.
  Eigen::MatrixXd slice(const Eigen::VectorXd& a) const;

 private:
  int m_;
  std::vector<double> v_;
};

/// Positive, convex, 1-homogeneous function on covectors w = (w_0, w_1, ..., w_n);
/// component 0 is the vertical direction phi^0.
struct FinslerNorm {
  std::string id;
  int n = 1;  // spatial dimension; covectors have n + 1 components
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;
  std::function<Tensor3(const Eigen::VectorXd&)> third;
  /// Claim that F(p + phi^0) = F(p - phi^0) for spatial p.
  bool symmetric_flag = false;
};

FinslerNorm euclid_norm(int n);
/// sqrt(w^T M w) for symmetric positive definite M of size n + 1.
FinslerNorm elliptic_norm(const Eigen::MatrixXd& M, std::string id = "");
/// |w| (1 + delta sum w_i^4 / |w|^4). Throws DomainError unless the sampled
/// tangent Hessian stays above 1e-6 on the unit sphere.
FinslerNorm quartic_norm(int n, double delta);

/// "euclid", "elliptic:<spec>" or "quartic:<delta>". The elliptic spec lists
/// rows separated by ';' and entries by ','; a single row is a diagonal.
FinslerNorm norm_from_id(const std::string& id, int n);
/// One instance of each family with default parameters.
std::vector<FinslerNorm> builtin_norms(int n);

/// Smallest eigenvalue of the Hessian restricted to the tangent space of the
/// level set, minimized over `samples` unit covectors.
double min_tangent_curvature(const FinslerNorm& nf, int samples = 4000, std::uint64_t seed = 7);

/// Spatial block of F(z) D^2F(z) at z = p - phi^0.
Eigen::MatrixXd flow_coefficients(const FinslerNorm& nf, const Eigen::VectorXd& p);
/// u_t = F D^2F|_{Du - phi^0} : D^2u, with id "aniso:<norm id>".
GraphFlowND aniso_flow(const FinslerNorm& nf);

/// Covector z = p - phi^0 for spatial p.
Eigen::VectorXd lift(const Eigen::VectorXd& p);
/// Spatial covector embedded with zero vertical component.
Eigen::VectorXd spatial(const Eigen::VectorXd& q);
/// x - (DF|_z(x) / F(z)) z, tangent to the level set through z.
Eigen::VectorXd hat(const FinslerNorm& nf, const Eigen::VectorXd& z, const Eigen::VectorXd& x);

struct FinslerSampling {
  int directions = 64;      // spatial unit directions
  int scales = 41;          // log-spaced F(p) values in [s_min, s_max]
  double s_min = 1e-2;
  double s_max = 1e3;
  int covectors = 400;      // unit covectors for the tensor probes
  int tangent_dirs = 400;   // unit tangent directions per covector
  std::uint64_t seed = 1;
  nlohmann::json to_json() const;
};

struct APEstimate {
  double A = 0.0;
  double P = 1.0;
  /// min over directions of F D^2F|_p(phi^0, phi^0), the large-scale limit of B.
  double limit = 0.0;
  /// max over directions of |B(s_max p) - F D^2F|_p(phi^0, phi^0)|.
  double plateau_gap = 0.0;
  bool plateau_reached = false;
};

/// B(p) = F D^2F|_{p - phi^0}(p, p) sampled at F(p) in [P, s_max]; A is its minimum.
APEstimate estimate_A_P(const FinslerNorm& nf, double P = 1.0, const FinslerSampling& s = {});

/// F(z)^2 D^3F|_z(p^, q^, r^) with each argument projected to the tangent space at z.
double cartan_Q(const FinslerNorm& nf, const Eigen::VectorXd& z, const Eigen::VectorXd& p,
                const Eigen::VectorXd& q, const Eigen::VectorXd& r);

struct SmallnessResult {
  double C1 = 0.0;
  bool periodic_ok = false;  // C1^2 < 4 / sqrt(n)
  bool interior_ok = false;  // C1^2 < 2 / sqrt(n)
  Eigen::VectorXd witness;
};

/// Empirical max of |Q(p,q,r)| / [F^3 D^2F(p,p) D^2F(q,q) D^2F(r,r)]^{1/2}.
SmallnessResult check_smallness(const FinslerNorm& nf, const FinslerSampling& s = {});

/// max |F(p + phi^0) - F(p - phi^0)| together with |DF|_p(phi^0)| and the
/// third-derivative consequences at spatial p on the unit ball.
VerificationReport check_symmetry(const FinslerNorm& nf, const FinslerSampling& s = {}, double tol = 1e-10);

/// min over sampled p (including p = 0) of the trace of the spatial block of F D^2F|_{p - phi^0}. n > 1.
double trace_lower_bound(const FinslerNorm& nf, const FinslerSampling& s = {});

/// max over sampled p, q of F(p - phi^0) F D^2F|_{p - phi^0}(p, q) / F(q). Requires symmetric_flag.
double cross_term_bound(const FinslerNorm& nf, const FinslerSampling& s = {});

/// S_eps: smallest sampled F(p) beyond which
/// |F D(F D^2F)|_{p - phi^0}(p, q^, q^)| <= eps G(p,p)^{1/2} G(q,q) on every sample. +inf if never.
std::map<double, double> s_eps_table(const FinslerNorm& nf, const std::vector<double>& eps,
                                     const FinslerSampling& s = {});

struct AnisoConstants {
  std::string norm_id;
  int n = 1;
  double A = 0.0;
  double P = 1.0;
  double k = 0.0;   // NaN when n = 1
  double C1 = 0.0;
  double C2 = 0.0;  // NaN without the symmetry claim
  std::map<double, double> S_eps;
  FinslerSampling sampling;
  nlohmann::json to_json() const;
};

AnisoConstants certify(const FinslerNorm& nf, double P = 1.0, const FinslerSampling& s = {});

}  // namespace parablab
