#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sqda {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Eigenvalues in descending order and the matching eigenvectors as columns.
/// `vectors` may hold fewer columns than `values` when only the leading part
/// of the basis is retained.
struct EigenPairs {
  VectorXd values;
  MatrixXd vectors;
};

/// Top-k eigenpairs of a symmetric matrix. The input is symmetrized as
/// (A + A^T) / 2 first. Each eigenvector is signed so that its
/// largest-magnitude coordinate is positive.
EigenPairs sym_eig_desc(const MatrixXd& a, Index k);

/// Full spectrum (all p values) with only the leading `keep` vectors.
EigenPairs sym_eig_full(const MatrixXd& a, Index keep);

/// Flips columns so that reference^T u >= 0. Columns orthogonal to the
/// reference are left alone.
EigenPairs sign_align(EigenPairs pairs, const VectorXd& reference);
void sign_align_columns(MatrixXd& vectors, const VectorXd& reference);

/// Makes the largest-magnitude coordinate of each column positive.
void canonicalize_signs(MatrixXd& vectors);

/// Unbiased (1 / (n - 1)) sample covariance of the rows of `data`.
MatrixXd sample_covariance(const MatrixXd& data, VectorXd* mean_out = nullptr);

/// PCA basis fit on a training matrix (rows are samples).
class Pca {
 public:
  static Pca fit(const MatrixXd& train, Index k);

  /// Subtracts the training mean and projects onto the basis.
  MatrixXd transform(const MatrixXd& data) const;

  const VectorXd& mean() const noexcept { return mean_; }
  const MatrixXd& basis() const noexcept { return basis_; }
  const VectorXd& variances() const noexcept { return variances_; }

 private:
  VectorXd mean_;
  MatrixXd basis_;
  VectorXd variances_;
};

/// Fits on `train` and projects `train` followed by every entry of `others`.
std::vector<MatrixXd> pca_fit_transform(const MatrixXd& train, const std::vector<MatrixXd>& others,
                                        Index k);

}  // namespace sqda
