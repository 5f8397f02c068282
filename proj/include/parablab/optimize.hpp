#pragma once

#include <Eigen/Dense>

#include <functional>

namespace parablab {

struct NelderMeadOptions {
  double initial_step = 0.05;
  double x_tol = 1e-12;
  double f_tol = 1e-15;
  int max_evals = 2000;
};

struct Minimum {
  Eigen::VectorXd x;
  double value;
  int evals;
};

/// Downhill simplex minimization of f starting from x0.
Minimum nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

/// Golden-section minimization on [a, b] for a unimodal function.
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10);

/// n quasi-uniform unit vectors in R^dim (dim 1..3): antipodal pair, equally
/// spaced circle, or Fibonacci sphere.
Eigen::MatrixXd sphere_directions(int dim, int n);

}  // namespace parablab
