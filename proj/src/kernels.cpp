#include "sqda/kernels.hpp"

#include <algorithm>
#include <numeric>

#include "sqda/errors.hpp"

namespace sqda::kernels {

namespace {

constexpr Index kBlock = 128;

Index block_count(Index rows) { return (rows + kBlock - 1) / kBlock; }

void check_cols(const MatrixXd& rows, Index p, const char* who) {
  if (rows.cols() != p) throw DimensionError(std::string(who) + ": column count mismatch");
}

// Quadratic form of one class for a block of rows, GEMM-based.
VectorXd imp_block_form(const ImpQdaModel::Side& s, const Eigen::Ref<const MatrixXd>& block) {
  const MatrixXd d = block.rowwise() - s.mean.transpose();
  VectorXd q = d.rowwise().squaredNorm();
  if (s.weights.size() > 0) {
    const MatrixXd proj = d * s.directions;
    q.noalias() += proj.array().square().matrix() * s.weights;
  }
  return q / s.sigma2;
}

// Same vote as knn_classify, on a precomputed row of squared distances.
int knn_vote(const Eigen::Ref<const VectorXd>& dist, const std::vector<int>& labels, Index k,
             std::vector<Index>& idx) {
  std::iota(idx.begin(), idx.end(), Index{0});
  auto closer = [&](Index a, Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), closer);
  Index votes[2] = {0, 0};
  for (Index t = 0; t < k; ++t) ++votes[labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])]];
  if (votes[0] == votes[1]) return labels[static_cast<std::size_t>(idx.front())];
  return votes[0] > votes[1] ? 0 : 1;
}

}  // namespace

VectorXd rqda_scores(const RQdaModel& m, const RidgeProjection& proj) {
  VectorXd score = VectorXd::Constant(proj.energy[0].rows(), m.eta());
  for (int i = 0; i < 2; ++i) {
    const VectorXd& s = m.spectrum[i]->eigen.values;
    const VectorXd weight =
        (1.0 + m.gamma * s.array().max(0.0)).inverse().matrix();
    const double sign = i == 0 ? -0.5 : 0.5;
    score.noalias() += sign * (proj.energy[i] * weight);
  }
  return score;
}

std::vector<int> labels_of(const VectorXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i) out[static_cast<std::size_t>(i)] = label_of(scores[i]);
  return out;
}

namespace serial {

VectorXd imp_qda_scores(const ImpQdaModel& m, const MatrixXd& rows) {
  check_cols(rows, m.dim(), "imp_qda_scores");
  VectorXd out(rows.rows());
  for (Index i = 0; i < rows.rows(); ++i) out[i] = imp_qda_score(m, rows.row(i).transpose());
  return out;
}

VectorXd oracle_qda_scores(const OracleQdaModel& m, const MatrixXd& rows) {
  check_cols(rows, m.cls[0].mean.size(), "oracle_qda_scores");
  VectorXd out(rows.rows());
  for (Index i = 0; i < rows.rows(); ++i) out[i] = oracle_qda_score(m, rows.row(i).transpose());
  return out;
}

RidgeProjection ridge_project(const RQdaModel& m, const MatrixXd& rows) {
  check_cols(rows, m.dim(), "ridge_project");
  RidgeProjection out;
  for (int c = 0; c < 2; ++c) {
    const ClassSpectrum& s = *m.spectrum[c];
    out.energy[c].resize(rows.rows(), m.dim());
    for (Index i = 0; i < rows.rows(); ++i) {
      const VectorXd coords = s.eigen.vectors.transpose() * (rows.row(i).transpose() - s.mean);
      out.energy[c].row(i) = coords.array().square().matrix().transpose();
    }
  }
  return out;
}

std::vector<int> knn_predict(const LabeledDataset& train, const MatrixXd& rows, Index k) {
  check_cols(rows, train.dim(), "knn_predict");
  std::vector<int> out(static_cast<std::size_t>(rows.rows()));
  for (Index i = 0; i < rows.rows(); ++i)
    out[static_cast<std::size_t>(i)] = knn_classify(train, rows.row(i).transpose(), k);
  return out;
}

}  // namespace serial

namespace parallel {

VectorXd imp_qda_scores(const ImpQdaModel& m, const MatrixXd& rows) {
  check_cols(rows, m.dim(), "imp_qda_scores");
  const Index n = rows.rows();
  VectorXd out(n);
  const Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index first = b * kBlock;
    const Index len = std::min(kBlock, n - first);
    const auto block = rows.middleRows(first, len);
    out.segment(first, len) = VectorXd::Constant(len, m.eta) -
                              0.5 * imp_block_form(m.side[0], block) +
                              0.5 * imp_block_form(m.side[1], block);
  }
  return out;
}

VectorXd oracle_qda_scores(const OracleQdaModel& m, const MatrixXd& rows) {
  check_cols(rows, m.cls[0].mean.size(), "oracle_qda_scores");
  VectorXd out(rows.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows.rows(); ++i) out[i] = oracle_qda_score(m, rows.row(i).transpose());
  return out;
}

RidgeProjection ridge_project(const RQdaModel& m, const MatrixXd& rows) {
  check_cols(rows, m.dim(), "ridge_project");
  const Index n = rows.rows();
  RidgeProjection out;
  for (int c = 0; c < 2; ++c) out.energy[c].resize(n, m.dim());
  const Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index first = b * kBlock;
    const Index len = std::min(kBlock, n - first);
    for (int c = 0; c < 2; ++c) {
      const ClassSpectrum& s = *m.spectrum[c];
      const MatrixXd centred = rows.middleRows(first, len).rowwise() - s.mean.transpose();
      out.energy[c].middleRows(first, len) = (centred * s.eigen.vectors).array().square().matrix();
    }
  }
  return out;
}

std::vector<int> knn_predict(const LabeledDataset& train, const MatrixXd& rows, Index k) {
  check_cols(rows, train.dim(), "knn_predict");
  const Index n = train.size();
  if (n == 0) throw InvalidArgument("knn: empty training set");
  if (k < 1 || k > n) throw InvalidArgument("knn: k outside [1, n]");
  // ||t - x||^2 = ||t||^2 - 2 t.x + ||x||^2, a block of rows at a time.
  const VectorXd train_sq = train.samples.rowwise().squaredNorm();
  std::vector<int> out(static_cast<std::size_t>(rows.rows()));
  const Index blocks = block_count(rows.rows());
#pragma omp parallel for schedule(dynamic, 1)
  for (Index b = 0; b < blocks; ++b) {
    const Index first = b * kBlock;
    const Index len = std::min(kBlock, rows.rows() - first);
    const auto block = rows.middleRows(first, len);
    MatrixXd dist = -2.0 * (block * train.samples.transpose());
    dist.colwise() += block.rowwise().squaredNorm();
    dist.rowwise() += train_sq.transpose();
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < len; ++i)
      out[static_cast<std::size_t>(first + i)] = knn_vote(dist.row(i).transpose(), train.labels, k, idx);
  }
  return out;
}

}  // namespace parallel

}  // namespace sqda::kernels
