#include "parablab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parablab/errors.hpp"
#include "parablab/quadrature.hpp"

namespace parablab {

namespace {

constexpr double kBracket = 1.0 - 1e-15;

void require_positive_time(double t, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(who) + ": requires t > 0");
}

double kernel(double c, double y, double t, KernelDerivative d) {
  return heat_kernel<double>(c, y, t, d);
}

// z(psi) = Phi(psi - 1) - Phi(psi + 1) and its psi-derivatives.
double psi_map(double c, double psi, double t, KernelDerivative d = KernelDerivative::value) {
  return kernel(c, psi - 1.0, t, d) - kernel(c, psi + 1.0, t, d);
}

}  // namespace

HeatKernel::HeatKernel(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("HeatKernel: c must be positive");
}

double phi_eval(const HeatKernel& k, double y, double t, KernelDerivative which) {
  require_positive_time(t, "phi_eval");
  return kernel(k.c(), y, t, which);
}

PsiBarrier::PsiBarrier(double c, double root_tol) : c_(c), root_tol_(root_tol) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("PsiBarrier: c must be positive");
  if (!(root_tol > 0.0)) throw DomainError("PsiBarrier: root_tol must be positive");
}

double PsiBarrier::z_limit(double t) const {
  require_positive_time(t, "PsiBarrier::z_limit");
  return -std::expm1(-4.0 * c_ / t) / std::sqrt(t);
}

double psi_eval(const PsiBarrier& b, double z, double t) {
  require_positive_time(t, "psi_eval");
  if (!std::isfinite(z)) throw DomainError("psi_eval: non-finite z");
  if (std::abs(z) >= b.z_limit(t)) throw RangeError("psi_eval: z outside the representable branch");
  if (z == 0.0) return 0.0;

  // Solve for |z| and restore the sign (the map is odd).
  const double target = std::abs(z);
  const double c = b.c();
  double lo = 0.0;
  double hi = kBracket;
  if (psi_map(c, hi, t) <= target) return std::copysign(hi, z);

  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (psi_map(c, mid, t) < target ? lo : hi) = mid;
  }
  // Safeguarded Newton inside the bracket.
  double psi = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    const double r = psi_map(c, psi, t) - target;
    if (r == 0.0) break;
    (r < 0.0 ? lo : hi) = psi;
    const double slope = psi_map(c, psi, t, KernelDerivative::y);
    double next = psi - r / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - psi);
    psi = next;
    if (step <= 2.0 * std::numeric_limits<double>::epsilon() || hi - lo <= 1e-16) break;
  }
  return std::copysign(psi, z);
}

ClampedPsi psi_eval_clamped(const PsiBarrier& b, double z, double t) {
  require_positive_time(t, "psi_eval_clamped");
  if (std::abs(z) >= b.z_limit(t)) return {std::copysign(1.0, z), true};
  return {psi_eval(b, z, t), false};
}

PsiDerivatives psi_derivs_at(const PsiBarrier& b, double psi, double t) {
  require_positive_time(t, "psi_derivs");
  const double c = b.c();
  const double fy = psi_map(c, psi, t, KernelDerivative::y);
  const double fyy = psi_map(c, psi, t, KernelDerivative::yy);
  const double fyyy = psi_map(c, psi, t, KernelDerivative::yyy);
  const double ft = psi_map(c, psi, t, KernelDerivative::t);
  PsiDerivatives d{};
  d.d1 = 1.0 / fy;
  d.d2 = -d.d1 * d.d1 * d.d1 * fyy;
  d.d3 = 3.0 * d.d2 * d.d2 / d.d1 - std::pow(d.d1, 4) * fyyy;
  d.dt = -ft / fy;
  return d;
}

PsiDerivatives psi_derivs(const PsiBarrier& b, double z, double t) {
  return psi_derivs_at(b, psi_eval(b, z, t), t);
}

double z_M(double t, double M, double c) {
  require_positive_time(t, "z_M");
  const double a = c * M * M / t;
  return 4.0 * M * M / std::sqrt(t) * (std::exp(-a) - std::exp(-9.0 * a));
}

double ScaledPsi::value(double z, double t) const {
  return 2.0 * M_ * psi_eval_clamped(psi_, z / (2.0 * M_), t / (4.0 * M_ * M_)).value;
}

double ScaledPsi::slope(double z, double t) const {
  const double tau = t / (4.0 * M_ * M_);
  const auto p = psi_eval_clamped(psi_, z / (2.0 * M_), tau);
  if (p.clamped) return std::numeric_limits<double>::infinity();
  return psi_derivs_at(psi_, p.value, tau).d1;
}

double cone_barrier_eval(const ConeBarrier& cb, double x, double t) {
  const double s = t + cb.eps;
  if (!(s > 0.0)) throw DomainError("cone_barrier_eval: requires t + eps > 0");
  const double c = 1.0 / (4.0 * cb.Lambda);
  const double y = x - cb.h;
  return cb.L * y * std::erf(std::sqrt(c / s) * y) +
         cb.L * std::sqrt(s / (c * std::numbers::pi)) * std::exp(-c * y * y / s);
}

double SphereBarrier::radius(double t) const {
  const double r2 = r0 * r0 - 2.0 * n * t;
  if (!(r2 > 0.0)) throw DomainError("SphereBarrier: past extinction time");
  return std::sqrt(r2);
}

namespace {

double sphere_root(const SphereBarrier& sb, const Eigen::VectorXd& x, double t) {
  const double r = sb.radius(t);
  if (x.size() != sb.center.size()) throw DomainError("sphere_eval: dimension mismatch");
  const double rho2 = (x - sb.center).squaredNorm();
  const double w = r * r - rho2;
  if (!(w > 0.0)) throw DomainError("sphere_eval: point outside the cap footprint");
  return std::sqrt(w);
}

}  // namespace

double sphere_eval(const SphereBarrier& sb, const Eigen::VectorXd& x, double t) {
  const double root = sphere_root(sb, x, t);
  return sb.orientation == CapOrientation::upper ? sb.height - root : sb.height + root;
}

double sphere_time_derivative(const SphereBarrier& sb, const Eigen::VectorXd& x, double t) {
  const double root = sphere_root(sb, x, t);
  const double rate = sb.n / root;
  return sb.orientation == CapOrientation::upper ? rate : -rate;
}

double bump_cdf(double u) {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  if (u > 0.0) return 1.0 - bump_cdf(-u);
  const auto& rule = gauss_legendre20();
  auto bump = [](double v) {
    const double d = v * v - 1.0;
    return d < 0.0 ? std::exp(1.0 / d) : 0.0;
  };
  static const double total = rule.integrate(bump, -1.0, 1.0, 16);
  return rule.integrate(bump, -1.0, u, 16) / total;
}

double step_eval(const StepData& sd, double x) {
  if (sd.eps < 0.0) throw DomainError("step_eval: eps must be >= 0");
  auto smoothed = [&](double d) {
    if (sd.eps == 0.0) return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    return 2.0 * bump_cdf(d / sd.eps) - 1.0;
  };
  if (sd.mode == StepMode::single) return sd.M * smoothed(x - sd.s);

  if (!(sd.R > 0.0)) throw DomainError("step_eval: crenellation period must be positive");
  if (!(sd.eps < 0.5 * sd.R)) throw DomainError("step_eval: eps must be below R/2");
  // Nearest jump at k R; the data to its right has sign (-1)^k.
  const double y = x - sd.s;
  const double k = std::round(y / sd.R);
  const double sign = std::fmod(std::abs(k), 2.0) == 0.0 ? 1.0 : -1.0;
  return sd.M * sign * smoothed(y - k * sd.R);
}

double inverf(double y) {
  if (!(std::abs(y) < 1.0)) throw DomainError("inverf: requires |y| < 1");
  if (y == 0.0) return 0.0;

  const double a = std::abs(y);
  double w = -std::log((1.0 - a) * (1.0 + a));
  double p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  double x = p * a;

  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  const double tail = 1.0 - a;
  for (int it = 0; it < 8; ++it) {
    // erfc form in the tail keeps the residual well conditioned near |y| = 1
    const double r = a > 0.5 ? tail - std::erfc(x) : std::erf(x) - a;
    const double dx = r / (two_over_sqrt_pi * std::exp(-x * x));
    x -= dx;
    if (std::abs(dx) <= 1e-16 * std::max(1.0, x)) break;
  }
  return std::copysign(x, y);
}

}  // namespace parablab
