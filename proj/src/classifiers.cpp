#include "sqda/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sqda/errors.hpp"
#include "sqda/kernels.hpp"

namespace sqda {

// ---------------------------------------------------------------------------
// Improved QDA

ImpQdaModel build_imp_qda(const SpikeEstimates& est, Variant variant) {
  ImpQdaModel m;
  m.coeffs = assemble_coefficients(est, variant);
  const FisherOptimum opt = optimal_w(m.coeffs);
  m.w_star = opt.w;
  m.theta = opt.theta;
  m.eta = optimal_eta(m.coeffs, m.w_star);

  const Index r1 = m.coeffs.r1;
  const Index r0 = m.coeffs.r0;
  m.side[1].weights = m.w_star.head(r1);
  m.side[0].weights = m.w_star.tail(r0);
  for (int i = 0; i < 2; ++i) {
    m.side[i].sigma2 = est.sigma2[i];
    m.side[i].directions = est.directions[i];
    if (m.side[i].weights.size() > 0 && m.side[i].weights.minCoeff() <= -1.0) {
      std::ostringstream msg;
      msg << "class " << i << ": weight " << m.side[i].weights.minCoeff()
          << " <= -1, inverse covariance estimate is not positive definite";
      m.warnings.push_back(msg.str());
    }
  }
  m.warnings.insert(m.warnings.end(), est.warnings.begin(), est.warnings.end());
  m.warnings.insert(m.warnings.end(), m.coeffs.warnings.begin(), m.coeffs.warnings.end());
  return m;
}

ImpQdaModel train_imp_qda(const ClassSpectrum& s0, const ClassSpectrum& s1,
                          const ImpQdaOptions& opts) {
  std::array<ClassSummary, 2> summary;
  const std::array<const ClassSpectrum*, 2> spectra{&s0, &s1};
  try {
    for (int i = 0; i < 2; ++i) summary[i] = summarize_class(*spectra[i], opts.sigma2[i], opts.rank[i]);
  } catch (const Error& e) {
    throw TrainingError("summarize", e.what());
  }
  SpikeEstimates est;
  try {
    est = estimate_spikes(summary[0], summary[1], opts.drop_margin);
  } catch (const Error& e) {
    throw TrainingError("estimate", e.what());
  }
  ImpQdaModel m;
  try {
    m = build_imp_qda(est, opts.variant);
  } catch (const Error& e) {
    throw TrainingError("optimize", e.what());
  }
  for (int i = 0; i < 2; ++i) {
    m.side[i].mean = summary[i].mean;
    if (summary[i].estimated && !summary[i].converged)
      m.warnings.push_back("noise/rank estimate did not converge for class " + std::to_string(i));
  }
  return m;
}

ImpQdaModel train_imp_qda(const MatrixXd& train0, const MatrixXd& train1,
                          const ImpQdaOptions& opts) {
  if (train0.cols() != train1.cols()) throw DimensionError("train_imp_qda: class dimensions differ");
  ClassSpectrum s0, s1;
  try {
    s0 = decompose_class(train0);
    s1 = decompose_class(train1);
  } catch (const Error& e) {
    throw TrainingError("decompose", e.what());
  }
  return train_imp_qda(s0, s1, opts);
}

double imp_qda_score(const ImpQdaModel& m, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != m.dim()) throw DimensionError("imp_qda_score: vector length mismatch");
  double q[2];
  for (int i = 0; i < 2; ++i) {
    const auto& s = m.side[i];
    const VectorXd d = x - s.mean;
    double acc = d.squaredNorm();
    for (Index j = 0; j < s.weights.size(); ++j) {
      const double proj = s.directions.col(j).dot(d);
      acc += s.weights[j] * proj * proj;
    }
    q[i] = acc / s.sigma2;
  }
  return m.eta - 0.5 * q[0] + 0.5 * q[1];
}

// ---------------------------------------------------------------------------
// R-QDA

RQdaModel RQdaModel::with_gamma(double g) const {
  if (!(g > 0.0)) throw InvalidArgument("R-QDA: gamma must be positive");
  RQdaModel out = *this;
  out.gamma = g;
  return out;
}

double RQdaModel::log_det_h(int cls) const {
  double acc = 0.0;
  for (double s : spectrum[cls]->eigen.values) acc -= std::log1p(gamma * std::max(s, 0.0));
  return acc;
}

double RQdaModel::eta() const {
  return -0.5 * (log_det_h(1) - log_det_h(0)) - std::log(prior[1] / prior[0]);
}

RQdaModel train_rqda(std::shared_ptr<const ClassSpectrum> s0,
                     std::shared_ptr<const ClassSpectrum> s1, double gamma,
                     std::optional<std::array<double, 2>> priors) {
  if (!s0 || !s1) throw InvalidArgument("train_rqda: missing class spectrum");
  if (s0->mean.size() != s1->mean.size()) throw DimensionError("train_rqda: class dimensions differ");
  if (s0->eigen.vectors.cols() != s0->mean.size() || s1->eigen.vectors.cols() != s1->mean.size())
    throw InvalidArgument("train_rqda: full eigenbasis required");
  RQdaModel m;
  m.spectrum = {std::move(s0), std::move(s1)};
  if (priors) {
    m.prior = *priors;
  } else {
    const double total = static_cast<double>(m.spectrum[0]->n + m.spectrum[1]->n);
    m.prior = {m.spectrum[0]->n / total, m.spectrum[1]->n / total};
  }
  if (!(m.prior[0] > 0.0 && m.prior[1] > 0.0)) throw InvalidArgument("train_rqda: priors must be positive");
  return m.with_gamma(gamma);
}

RQdaModel train_rqda(const MatrixXd& train0, const MatrixXd& train1, double gamma,
                     std::optional<std::array<double, 2>> priors) {
  return train_rqda(std::make_shared<const ClassSpectrum>(decompose_class(train0)),
                    std::make_shared<const ClassSpectrum>(decompose_class(train1)), gamma, priors);
}

double rqda_score(const RQdaModel& m, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != m.dim()) throw DimensionError("rqda_score: vector length mismatch");
  double q[2];
  for (int i = 0; i < 2; ++i) {
    const ClassSpectrum& s = *m.spectrum[i];
    const VectorXd coords = s.eigen.vectors.transpose() * (x - s.mean);
    double acc = 0.0;
    for (Index j = 0; j < coords.size(); ++j)
      acc += coords[j] * coords[j] / (1.0 + m.gamma * std::max(s.eigen.values[j], 0.0));
    q[i] = acc;
  }
  return m.eta() - 0.5 * q[0] + 0.5 * q[1];
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int i = -10; i <= 10; ++i) grid.push_back(std::pow(10.0, i / 10.0));
  return grid;
}

GammaChoice pick_gamma(const std::vector<double>& grid, const std::vector<double>& errors) {
  if (grid.empty()) throw InvalidArgument("select_gamma: empty grid");
  if (errors.size() != grid.size()) throw DimensionError("select_gamma: error count mismatch");
  GammaChoice out;
  out.errors = errors;
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (errors[i] < errors[best] || (errors[i] == errors[best] && grid[i] < grid[best])) best = i;
  }
  out.gamma = grid[best];
  out.error = errors[best];
  return out;
}

GammaChoice select_gamma(const RQdaModel& base, const std::vector<double>& grid,
                         const LabeledDataset& eval) {
  if (grid.empty()) throw InvalidArgument("select_gamma: empty grid");
  const auto proj = kernels::parallel::ridge_project(base, eval.samples);
  std::vector<double> errors;
  errors.reserve(grid.size());
  for (double g : grid) {
    const VectorXd scores = kernels::rqda_scores(base.with_gamma(g), proj);
    errors.push_back(error_rates(eval.labels, kernels::labels_of(scores)).error);
  }
  return pick_gamma(grid, errors);
}

GammaChoice select_gamma_kfold(const MatrixXd& train0, const MatrixXd& train1,
                               const std::vector<double>& grid, int folds, std::uint64_t seed,
                               std::optional<std::array<double, 2>> priors) {
  if (grid.empty()) throw InvalidArgument("select_gamma: empty grid");
  if (folds < 2) throw InvalidArgument("select_gamma: need at least two folds");
  const std::array<const MatrixXd*, 2> data{&train0, &train1};
  std::array<std::vector<Index>, 2> order;
  Rng rng(seed);
  for (int i = 0; i < 2; ++i) {
    if (data[i]->rows() < 2 * folds)
      throw InvalidArgument("select_gamma: too few samples for k-fold selection");
    order[i].resize(static_cast<std::size_t>(data[i]->rows()));
    std::iota(order[i].begin(), order[i].end(), Index{0});
    std::shuffle(order[i].begin(), order[i].end(), rng.engine());
  }
  std::vector<double> wrong(grid.size(), 0.0);
  double total = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::array<MatrixXd, 2> fit;
    LabeledDataset held;
    std::vector<std::pair<int, Index>> held_rows;
    for (int i = 0; i < 2; ++i) {
      std::vector<Index> keep;
      for (std::size_t t = 0; t < order[i].size(); ++t) {
        if (static_cast<int>(t % folds) == f) held_rows.emplace_back(i, order[i][t]);
        else keep.push_back(order[i][t]);
      }
      fit[i] = (*data[i])(keep, Eigen::all);
    }
    held.samples.resize(static_cast<Index>(held_rows.size()), train0.cols());
    for (std::size_t t = 0; t < held_rows.size(); ++t) {
      held.samples.row(static_cast<Index>(t)) = data[held_rows[t].first]->row(held_rows[t].second);
      held.labels.push_back(held_rows[t].first);
    }
    const RQdaModel base = train_rqda(fit[0], fit[1], grid.front(), priors);
    const auto proj = kernels::parallel::ridge_project(base, held.samples);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const auto labels = kernels::labels_of(kernels::rqda_scores(base.with_gamma(grid[gi]), proj));
      for (std::size_t t = 0; t < labels.size(); ++t) wrong[gi] += labels[t] != held.labels[t];
    }
    total += static_cast<double>(held.labels.size());
  }
  for (auto& w : wrong) w /= total;
  return pick_gamma(grid, wrong);
}

// ---------------------------------------------------------------------------
// Oracle QDA

double OracleQdaModel::eta() const {
  return -0.5 * (cls[0].cov.log_det() - cls[1].cov.log_det()) - std::log(cls[1].prior / cls[0].prior);
}

double oracle_qda_score(const OracleQdaModel& m, const Eigen::Ref<const VectorXd>& x) {
  double q[2];
  for (int i = 0; i < 2; ++i) {
    const VectorXd d = x - m.cls[i].mean;
    q[i] = d.dot(m.cls[i].cov.apply_inverse(d));
  }
  return m.eta() - 0.5 * q[0] + 0.5 * q[1];
}

// ---------------------------------------------------------------------------

int knn_classify(const LabeledDataset& train, const Eigen::Ref<const VectorXd>& x, Index k) {
  const Index n = train.size();
  if (n == 0) throw InvalidArgument("knn: empty training set");
  if (k < 1 || k > n) throw InvalidArgument("knn: k outside [1, n]");
  if (x.size() != train.dim()) throw DimensionError("knn: vector length mismatch");
  const VectorXd dist = (train.samples.rowwise() - x.transpose()).rowwise().squaredNorm();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  auto closer = [&](Index a, Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), closer);
  Index votes[2] = {0, 0};
  for (Index t = 0; t < k; ++t) ++votes[train.labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])]];
  if (votes[0] == votes[1]) return train.labels[static_cast<std::size_t>(idx.front())];
  return votes[0] > votes[1] ? 0 : 1;
}

ErrorRates error_rates(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("error_rates: length mismatch");
  if (truth.empty()) throw InvalidArgument("error_rates: empty test set");
  ErrorRates out;
  std::array<Index, 2> wrong{0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    if (t != 0 && t != 1) throw InvalidArgument("error_rates: label outside {0,1}");
    ++out.count[t];
    wrong[t] += predicted[i] != t;
  }
  const double total = static_cast<double>(truth.size());
  for (int i = 0; i < 2; ++i) {
    out.class_error[i] = out.count[i] ? static_cast<double>(wrong[i]) / out.count[i] : 0.0;
    out.error += out.count[i] / total * out.class_error[i];
  }
  return out;
}

ErrorRates evaluate(const std::function<int(const VectorXd&)>& classify,
                    const LabeledDataset& test) {
  std::vector<int> predicted;
  predicted.reserve(test.labels.size());
  for (Index i = 0; i < test.size(); ++i) predicted.push_back(classify(test.samples.row(i).transpose()));
  return error_rates(test.labels, predicted);
}

}  // namespace sqda
