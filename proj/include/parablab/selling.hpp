#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace parablab {

template <int N>
struct LatticeStencil {
  Eigen::Matrix<int, N, 1> offset;
  double weight = 0.0;
};

/// Selling's reduction of a symmetric positive semidefinite 2x2 or 3x3 matrix:
/// D = sum_k weight_k offset_k offset_k^T with weight_k >= 0 and integer offsets.
/// Weights of nearly degenerate matrices are clipped at zero.
template <int N>
std::vector<LatticeStencil<N>> selling_decomposition(const Eigen::Matrix<double, N, N>& D) {
  static_assert(N == 2 || N == 3, "selling_decomposition: dimension 2 or 3");
  using IVec = Eigen::Matrix<int, N, 1>;
  using DVec = Eigen::Matrix<double, N, 1>;
  std::array<IVec, N + 1> e;
  for (int i = 0; i < N; ++i) e[i] = IVec::Unit(i);
  e[N] = -IVec::Ones();

  auto inner = [&](int i, int j) {
    const DVec a = e[i].template cast<double>(), b = e[j].template cast<double>();
    return a.dot(D * b);
  };
  const double scale = std::max(D.diagonal().cwiseAbs().maxCoeff(), 1e-300);

  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (int i = 0; i <= N && !changed; ++i) {
      for (int j = i + 1; j <= N && !changed; ++j) {
        if (inner(i, j) <= 1e-14 * scale) continue;
        if constexpr (N == 2) {
          const int k = 3 - i - j;
          e[k] = e[i] - e[j];
          e[i] = -e[i];
        } else {
          for (int k = 0; k <= N; ++k)
            if (k != i && k != j) e[k] += e[i];
          e[i] = -e[i];
        }
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<LatticeStencil<N>> out;
  for (int i = 0; i <= N; ++i) {
    for (int j = i + 1; j <= N; ++j) {
      const double w = -inner(i, j);
      if (w <= 0.0) continue;
      IVec v;
      if constexpr (N == 2) {
        const IVec& ek = e[3 - i - j];
        v << -ek[1], ek[0];
      } else {
        int k = -1, l = -1;
        for (int m = 0; m <= N; ++m) {
          if (m == i || m == j) continue;
          (k < 0 ? k : l) = m;
        }
        v = e[k].cross(e[l]);
      }
      out.push_back({v, w});
    }
  }
  return out;
}

}  // namespace parablab
