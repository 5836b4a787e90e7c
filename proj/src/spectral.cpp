#include "sqda/spectral.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sqda/errors.hpp"

namespace sqda {

namespace {

// SelfAdjointEigenSolver returns ascending order; flip to descending and keep
// the leading `keep` vectors.
EigenPairs decompose(const MatrixXd& a, Index keep_values, Index keep_vectors) {
  if (a.rows() != a.cols()) throw DimensionError("eigendecomposition: matrix is not square");
  if (!a.allFinite()) throw InvalidArgument("eigendecomposition: non-finite entries");
  const Index p = a.rows();
  const MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(
      sym, keep_vectors > 0 ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
  EigenPairs out;
  out.values = solver.eigenvalues().reverse().head(keep_values);
  if (keep_vectors > 0) {
    out.vectors = solver.eigenvectors().rightCols(keep_vectors).rowwise().reverse();
    canonicalize_signs(out.vectors);
  } else {
    out.vectors = MatrixXd(p, 0);
  }
  return out;
}

}  // namespace

EigenPairs sym_eig_desc(const MatrixXd& a, Index k) {
  if (k < 1 || k > a.rows())
    throw InvalidArgument("sym_eig_desc: k = " + std::to_string(k) + " outside [1, p]");
  return decompose(a, k, k);
}

EigenPairs sym_eig_full(const MatrixXd& a, Index keep) {
  if (keep < 0 || keep > a.rows()) throw InvalidArgument("sym_eig_full: keep outside [0, p]");
  return decompose(a, a.rows(), keep);
}

void canonicalize_signs(MatrixXd& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

void sign_align_columns(MatrixXd& vectors, const VectorXd& reference) {
  if (reference.size() != vectors.rows()) throw DimensionError("sign_align: length mismatch");
  if (reference.squaredNorm() == 0.0) throw InvalidArgument("sign_align: zero reference");
  for (Index j = 0; j < vectors.cols(); ++j)
    if (reference.dot(vectors.col(j)) < 0.0) vectors.col(j) = -vectors.col(j);
}

EigenPairs sign_align(EigenPairs pairs, const VectorXd& reference) {
  sign_align_columns(pairs.vectors, reference);
  return pairs;
}

MatrixXd sample_covariance(const MatrixXd& data, VectorXd* mean_out) {
  const Index n = data.rows();
  if (n < 2) throw InvalidArgument("sample_covariance: need at least two rows");
  const VectorXd mean = data.colwise().mean();
  const MatrixXd centred = data.rowwise() - mean.transpose();
  MatrixXd cov = MatrixXd::Zero(data.cols(), data.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centred.transpose(), 1.0 / (n - 1.0));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  if (mean_out) *mean_out = mean;
  return cov;
}

Pca Pca::fit(const MatrixXd& train, Index k) {
  const Index n = train.rows();
  const Index d = train.cols();
  if (k < 1 || k > std::min(n, d))
    throw InvalidArgument("pca: target dimension " + std::to_string(k) + " exceeds min(n, d)");
  Pca out;
  out.mean_ = train.colwise().mean();
  const MatrixXd centred = train.rowwise() - out.mean_.transpose();
  if (n >= d) {
    const EigenPairs eig = sym_eig_desc(sample_covariance(train), k);
    out.basis_ = eig.vectors;
    out.variances_ = eig.values;
  } else {
    // Gram route: eigenvectors of X X^T map to those of X^T X.
    const MatrixXd gram = centred * centred.transpose() / (n - 1.0);
    const EigenPairs eig = sym_eig_desc(gram, k);
    out.basis_.resize(d, k);
    for (Index j = 0; j < k; ++j) {
      if (!(eig.values[j] > 1e-12 * std::max(1.0, eig.values[0])))
        throw InvalidArgument("pca: target dimension exceeds the rank of the training data");
      out.basis_.col(j) = centred.transpose() * eig.vectors.col(j);
      out.basis_.col(j).normalize();
    }
    canonicalize_signs(out.basis_);
    out.variances_ = eig.values;
  }
  if (out.variances_[k - 1] <= 1e-12 * std::max(1.0, out.variances_[0]))
    throw InvalidArgument("pca: target dimension exceeds the rank of the training data");
  return out;
}

MatrixXd Pca::transform(const MatrixXd& data) const {
  if (data.cols() != mean_.size()) throw DimensionError("pca transform: column mismatch");
  return (data.rowwise() - mean_.transpose()) * basis_;
}

std::vector<MatrixXd> pca_fit_transform(const MatrixXd& train, const std::vector<MatrixXd>& others,
                                        Index k) {
  const Pca pca = Pca::fit(train, k);
  std::vector<MatrixXd> out;
  out.reserve(others.size() + 1);
  out.push_back(pca.transform(train));
  for (const auto& m : others) out.push_back(pca.transform(m));
  return out;
}

}  // namespace sqda
