#include "sqda/model.hpp"

#include <cmath>
#include <string>

#include "sqda/errors.hpp"

namespace sqda {

SpikedCovariance::SpikedCovariance(double sigma2, VectorXd lambdas, MatrixXd directions)
    : sigma2_(sigma2), lambdas_(std::move(lambdas)), directions_(std::move(directions)) {
  if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_))
    throw InvalidArgument("spiked covariance: sigma2 must be positive");
  if (directions_.cols() != lambdas_.size())
    throw DimensionError("spiked covariance: " + std::to_string(lambdas_.size()) +
                         " spikes but " + std::to_string(directions_.cols()) + " directions");
  if (directions_.rows() < 1) throw DimensionError("spiked covariance: dimension must be >= 1");
  for (Index j = 0; j < lambdas_.size(); ++j) {
    if (!(lambdas_[j] > 0.0)) throw InvalidArgument("spiked covariance: spikes must be positive");
    if (j > 0 && lambdas_[j] > lambdas_[j - 1])
      throw InvalidArgument("spiked covariance: spikes must be sorted descending");
  }
  if (lambdas_.size() == 0) return;
  const MatrixXd gram = directions_.transpose() * directions_;
  const double dev = (gram - MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10)
    throw InvalidArgument("spiked covariance: directions are not orthonormal");
}

SpikedCovariance SpikedCovariance::isotropic(Index dim, double sigma2) {
  return SpikedCovariance(sigma2, VectorXd(0), MatrixXd(dim, 0));
}

double SpikedCovariance::log_det() const {
  double acc = static_cast<double>(dim()) * std::log(sigma2_);
  for (Index j = 0; j < rank(); ++j) acc += std::log1p(lambdas_[j]);
  return acc;
}

VectorXd SpikedCovariance::apply_inverse(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != dim()) throw DimensionError("apply_inverse: length mismatch");
  VectorXd out = x;
  const VectorXd proj = directions_.transpose() * x;
  for (Index j = 0; j < rank(); ++j)
    out -= (lambdas_[j] / (1.0 + lambdas_[j]) * proj[j]) * directions_.col(j);
  return out / sigma2_;
}

MatrixXd materialize_covariance(const SpikedCovariance& cov) {
  MatrixXd m = MatrixXd::Identity(cov.dim(), cov.dim());
  const auto& v = cov.directions();
  m += v * cov.lambdas().asDiagonal() * v.transpose();
  return cov.sigma2() * m;
}

VectorXd apply_sqrt(const SpikedCovariance& cov, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != cov.dim())
    throw DimensionError("apply_sqrt: vector of length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(cov.dim()));
  VectorXd out = x;
  const auto& v = cov.directions();
  const VectorXd proj = v.transpose() * x;
  for (Index j = 0; j < cov.rank(); ++j)
    out += ((std::sqrt(1.0 + cov.lambdas()[j]) - 1.0) * proj[j]) * v.col(j);
  return std::sqrt(cov.sigma2()) * out;
}

void apply_sqrt_rows(const SpikedCovariance& cov, MatrixXd& rows) {
  if (rows.cols() != cov.dim()) throw DimensionError("apply_sqrt_rows: column mismatch");
  const auto& v = cov.directions();
  if (cov.rank() > 0) {
    VectorXd scale(cov.rank());
    for (Index j = 0; j < cov.rank(); ++j) scale[j] = std::sqrt(1.0 + cov.lambdas()[j]) - 1.0;
    const MatrixXd proj = rows * v;
    rows.noalias() += proj * scale.asDiagonal() * v.transpose();
  }
  rows *= std::sqrt(cov.sigma2());
}

Index LabeledDataset::count(int label) const {
  Index k = 0;
  for (int l : labels) k += (l == label);
  return k;
}

MatrixXd LabeledDataset::rows_of(int label) const {
  MatrixXd out(count(label), dim());
  Index k = 0;
  for (Index i = 0; i < size(); ++i)
    if (labels[static_cast<std::size_t>(i)] == label) out.row(k++) = samples.row(i);
  return out;
}

void LabeledDataset::validate() const {
  if (static_cast<Index>(labels.size()) != samples.rows())
    throw DimensionError("dataset: label count does not match row count");
  for (int l : labels)
    if (l != 0 && l != 1) throw InvalidArgument("dataset: label " + std::to_string(l) + " not in {0,1}");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

MatrixXd Rng::normal_matrix(Index rows, Index cols) {
  MatrixXd z(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) z(i, j) = normal();
  return z;
}

MatrixXd sample_class(const ClassModel& model, Index n, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample_class: n must be >= 1");
  if (model.mean.size() != model.cov.dim()) throw DimensionError("sample_class: mean/cov mismatch");
  MatrixXd x = rng.normal_matrix(n, model.cov.dim());
  apply_sqrt_rows(model.cov, x);
  x.rowwise() += model.mean.transpose();
  return x;
}

MatrixXd sample_class(const ClassModel& model, Index n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_class(model, n, rng);
}

namespace {

MatrixXd axis_block(Index p, Index first, Index count) {
  MatrixXd v = MatrixXd::Zero(p, count);
  for (Index j = 0; j < count; ++j) v(first + j, j) = 1.0;
  return v;
}

}  // namespace

std::pair<ClassModel, ClassModel> synth_protocol_models(double a, Index p, double sigma0_sq,
                                                        double sigma1_sq) {
  if (p < 6) throw InvalidArgument("synth_protocol_models: p must be >= 6");
  ClassModel c0, c1;
  c0.mean = VectorXd::Constant(p, a / std::sqrt(static_cast<double>(p)));
  c1.mean = -c0.mean;
  c0.cov = SpikedCovariance(sigma0_sq, (VectorXd(3) << 5, 4, 3).finished(), axis_block(p, 0, 3));
  c1.cov = SpikedCovariance(sigma1_sq, (VectorXd(3) << 6, 5, 4).finished(), axis_block(p, 3, 3));
  c0.prior = c1.prior = 0.5;
  return {std::move(c0), std::move(c1)};
}

std::pair<ClassModel, ClassModel> histogram_protocol_models(Index p) {
  if (p < 6) throw InvalidArgument("histogram_protocol_models: p must be >= 6");
  ClassModel c0, c1;
  c0.mean = VectorXd::Constant(p, 4.0 / std::sqrt(static_cast<double>(p)));
  c1.mean = -c0.mean;
  const VectorXd lambdas = (VectorXd(3) << 4, 3, 2).finished();
  c0.cov = SpikedCovariance(1.0, lambdas, axis_block(p, 0, 3));
  c1.cov = SpikedCovariance(1.0, lambdas, axis_block(p, 3, 3));
  return {std::move(c0), std::move(c1)};
}

}  // namespace sqda
