#pragma once

#include <Eigen/Dense>

namespace parablab {

/// Gauss-Legendre rule on [-1, 1] by the Golub-Welsch eigenvalue method.
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  explicit GaussLegendre(int order);

  /// Integral of f over [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < nodes.size(); ++k) sum += weights[k] * f(mid + half * nodes[k]);
    return half * sum;
  }

  /// Composite rule with `panels` equal subintervals.
  template <typename F>
  double integrate(F&& f, double a, double b, int panels) const {
    const double w = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) sum += integrate(f, a + p * w, a + (p + 1) * w);
    return sum;
  }
};

/// Shared 20-point rule.
const GaussLegendre& gauss_legendre20();

}  // namespace parablab
