#pragma once

// Random generators shared by the test suites.

#include <random>

#include "gatetele/core.hpp"

namespace gatetele::testing {

/// Haar unitary from the QR decomposition of a complex Ginibre matrix.
template <typename Rng>
CMatrix random_unitary(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> g;
  CMatrix z(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

/// Random full-rank density matrix G G^dagger / Tr.
template <typename Rng>
DensityMatrix random_density(int num_qubits, Rng& rng) {
  std::normal_distribution<double> g;
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  CMatrix z(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
  }
  CMatrix rho = z * z.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

}  // namespace gatetele::testing
