#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace parablab {

// ---------------------------------------------------------------------------
// Heat kernel Phi(y,t) = t^{-1/2} exp(-c y^2 / t), which satisfies Phi_yy = 4c Phi_t.

enum class KernelDerivative { value, y, yy, yyy, t };

template <typename Scalar>
Scalar heat_kernel(Scalar c, Scalar y, Scalar t, KernelDerivative which) {
  using std::exp;
  using std::sqrt;
  const Scalar e = exp(-c * y * y / t);
  const Scalar t32 = t * sqrt(t);
  switch (which) {
    case KernelDerivative::value:
      return e / sqrt(t);
    case KernelDerivative::y:
      return -Scalar(2) * c * y / t32 * e;
    case KernelDerivative::yy:
      return Scalar(2) * c / t32 * (Scalar(2) * c * y * y / t - Scalar(1)) * e;
    case KernelDerivative::yyy:
      return Scalar(4) * c * c * y / (t32 * t) * (Scalar(3) - Scalar(2) * c * y * y / t) * e;
    case KernelDerivative::t:
      return Scalar(1) / (Scalar(2) * t32) * (Scalar(-1) + Scalar(2) * c * y * y / t) * e;
  }
  return Scalar(0);
}

class HeatKernel {
 public:
  explicit HeatKernel(double c);
  double c() const noexcept { return c_; }

 private:
  double c_;
};

/// Phi or one of its derivatives. Throws DomainError for t <= 0.
double phi_eval(const HeatKernel& k, double y, double t,
                KernelDerivative which = KernelDerivative::value);

// ---------------------------------------------------------------------------
// Implicit barrier psi: z = Phi(psi - 1, t) - Phi(psi + 1, t), psi in (-1, 1).

class PsiBarrier {
 public:
  explicit PsiBarrier(double c, double root_tol = 1e-12);
  double c() const noexcept { return c_; }
  double root_tol() const noexcept { return root_tol_; }

  /// sup |z| over the representable branch, Phi(0,t) - Phi(2,t).
  double z_limit(double t) const;

 private:
  double c_;
  double root_tol_;
};

struct PsiDerivatives {
  double d1;   // psi'
  double d2;   // psi''
  double d3;   // psi'''
  double dt;   // psi_t
};

/// Solves the implicit equation. Throws RangeError when |z| >= z_limit(t),
/// DomainError when t <= 0.
double psi_eval(const PsiBarrier& b, double z, double t);

struct ClampedPsi {
  double value;
  bool clamped;
};
/// Like psi_eval, but out-of-range z maps to sign(z) (the t -> 0 limit) with a flag.
ClampedPsi psi_eval_clamped(const PsiBarrier& b, double z, double t);

/// Closed-form derivatives evaluated at psi = psi_eval(z, t).
PsiDerivatives psi_derivs(const PsiBarrier& b, double z, double t);
/// Same, at an already-solved value psi.
PsiDerivatives psi_derivs_at(const PsiBarrier& b, double psi, double t);

/// Width z_M(t) where the scaled barrier 2M psi(z/2M, t/4M^2) reaches M.
double z_M(double t, double M, double c);

/// The scaled barrier phi(z,t) = 2M psi(z/(2M), t/(4M^2)) used against a
/// solution with oscillation bound M. Out-of-range z clamps to phi = 2M sign(z).
class ScaledPsi {
 public:
  ScaledPsi(double M, double c, double root_tol = 1e-12) : M_(M), psi_(c, root_tol) {}
  double M() const noexcept { return M_; }
  const PsiBarrier& psi() const noexcept { return psi_; }

  double value(double z, double t) const;
  /// phi'(z,t) = psi'(z/2M, t/4M^2); +infinity at the clamped edge.
  double slope(double z, double t) const;

 private:
  double M_;
  PsiBarrier psi_;
};

// ---------------------------------------------------------------------------

/// Exact heat-equation solution v_t = v_xx/(4c), c = 1/(4 Lambda), dominating the
/// cone L|x - h| at t + eps -> 0.
struct ConeBarrier {
  double L;
  double h;
  double Lambda;
  double eps = 0.0;
};

double cone_barrier_eval(const ConeBarrier& cb, double x, double t);

enum class CapOrientation {
  upper,  // lower cap of the upper sphere: height - sqrt(r^2 - |x - center|^2)
  lower   // upper cap of the lower sphere: height + sqrt(r^2 - |x - center|^2)
};

/// Sphere shrinking under mean curvature flow, r(t) = sqrt(r0^2 - 2 n t).
struct SphereBarrier {
  Eigen::VectorXd center;
  double height;
  double r0;
  int n;
  CapOrientation orientation = CapOrientation::upper;

  double radius(double t) const;
  double extinction_time() const { return r0 * r0 / (2.0 * n); }
};

/// Cap height; throws DomainError past extinction or outside the cap footprint.
double sphere_eval(const SphereBarrier& sb, const Eigen::VectorXd& x, double t);
double sphere_time_derivative(const SphereBarrier& sb, const Eigen::VectorXd& x, double t);

// ---------------------------------------------------------------------------

enum class StepMode { single, crenellated };

/// +-M step at s (single) or M sigma(sin(pi x / R)) (crenellated), optionally
/// mollified with the compact bump kernel of radius eps.
struct StepData {
  double M;
  double s = 0.0;
  StepMode mode = StepMode::single;
  double R = 1.0;
  double eps = 0.0;
};

double step_eval(const StepData& sd, double x);

/// Cumulative distribution of the normalized bump kernel exp(1/(u^2 - 1)) on [-1, 1].
double bump_cdf(double u);

/// Inverse error function on (-1, 1). Throws DomainError for |y| >= 1.
double inverf(double y);

}  // namespace parablab
