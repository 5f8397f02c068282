#include "parablab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "parablab/errors.hpp"

namespace parablab {

Minimum nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1][i] += opts.initial_step;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  for (int i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<int> order(n + 1);
  while (evals < opts.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order.front(), worst = order.back(), second = order[n - 1];

    double spread = 0.0;
    for (int i = 0; i <= n; ++i) spread = std::max(spread, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
    if (spread <= opts.x_tol) break;
    if (std::abs(vals[worst] - vals[best]) <= opts.f_tol * (1 + std::abs(vals[best]))) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }
  const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals};
}

double golden_section_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

Eigen::MatrixXd sphere_directions(int dim, int n) {
  if (dim < 1 || dim > 3 || n < 2) throw DomainError("sphere_directions: dim must be 1..3, n >= 2");
  if (dim == 1) {
    Eigen::MatrixXd d(1, 2);
    d << 1.0, -1.0;
    return d;
  }
  Eigen::MatrixXd d(dim, n);
  const double pi = std::numbers::pi;
  if (dim == 2) {
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * pi * (k + 0.5) / n;
      d(0, k) = std::cos(a);
      d(1, k) = std::sin(a);
    }
    return d;
  }
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / n;
    const double r = std::sqrt(1.0 - z * z);
    d(0, k) = r * std::cos(golden * k);
    d(1, k) = r * std::sin(golden * k);
    d(2, k) = z;
  }
  return d;
}

}  // namespace parablab
