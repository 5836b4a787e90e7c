#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "sqda/model.hpp"

namespace testing {

using sqda::Index;
using sqda::MatrixXd;
using sqda::VectorXd;

/// Random p x r matrix with orthonormal columns.
inline MatrixXd random_orthonormal(Index p, Index r, sqda::Rng& rng) {
  const MatrixXd g = rng.normal_matrix(p, r);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  return qr.householderQ() * MatrixXd::Identity(p, r);
}

/// Spiked covariance with random directions and descending strengths.
inline sqda::SpikedCovariance random_spiked(Index p, Index r, double sigma2, sqda::Rng& rng) {
  VectorXd lam(r);
  for (Index j = 0; j < r; ++j) lam[j] = 8.0 - 1.5 * static_cast<double>(j) + rng.uniform();
  return sqda::SpikedCovariance(sigma2, lam, random_orthonormal(p, r, rng));
}

/// Symmetric square root through a dense eigendecomposition.
inline MatrixXd dense_sqrt(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

inline MatrixXd random_spd(Index k, sqda::Rng& rng, double floor = 0.5) {
  const MatrixXd g = rng.normal_matrix(k, k);
  return g * g.transpose() + floor * MatrixXd::Identity(k, k);
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testing
