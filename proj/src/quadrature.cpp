#include "parablab/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace parablab {

GaussLegendre::GaussLegendre(int order) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  nodes = es.eigenvalues();
  weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

const GaussLegendre& gauss_legendre20() {
  static const GaussLegendre rule(20);
  return rule;
}

}  // namespace parablab
