#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqda/equivalents.hpp"
#include "sqda/model.hpp"
#include "sqda/rmt.hpp"

namespace sqda {

/// Score > 0 means class 0; a score of exactly 0 goes to class 1.
inline int label_of(double score) noexcept { return score > 0.0 ? 0 : 1; }

// ---------------------------------------------------------------------------
// Improved QDA

struct ImpQdaOptions {
  Variant variant = Variant::general;
  /// Known noise variances / spike counts. Missing entries are estimated.
  std::array<std::optional<double>, 2> sigma2;
  std::array<std::optional<Index>, 2> rank;
  double drop_margin = 0.05;
  double noise_delta = 0.1;
};

/// Inverse covariance estimate per class:
/// C_i^{-1} = (1 / sigma_i^2)(I + sum_j w_{j,i} u_{j,i} u_{j,i}^T).
struct ImpQdaModel {
  struct Side {
    VectorXd mean;
    double sigma2 = 1.0;
    MatrixXd directions;  // p x r_i
    VectorXd weights;     // r_i
  };
  std::array<Side, 2> side;
  double eta = 0.0;
  VectorXd w_star;  // [class-1 weights, class-0 weights]
  double theta = 0.0;
  EquivalentCoefficients coeffs;
  std::vector<std::string> warnings;

  Index dim() const noexcept { return side[0].mean.size(); }
};

/// Builds the decision rule from estimates: closed-form w, then eta.
ImpQdaModel build_imp_qda(const SpikeEstimates& est, Variant variant);

ImpQdaModel train_imp_qda(const ClassSpectrum& s0, const ClassSpectrum& s1,
                          const ImpQdaOptions& opts = {});
ImpQdaModel train_imp_qda(const MatrixXd& train0, const MatrixXd& train1,
                          const ImpQdaOptions& opts = {});

/// eta - q0 / 2 + q1 / 2 with q_i = (||d_i||^2 + sum_j w_{j,i} (u_{j,i}^T d_i)^2) / sigma_i^2
/// and d_i = x - xbar_i. O(p (r0 + r1)).
double imp_qda_score(const ImpQdaModel& m, const Eigen::Ref<const VectorXd>& x);

// ---------------------------------------------------------------------------
// Ridge-regularized QDA

/// Decompositions are shared between models that differ only in gamma.
struct RQdaModel {
  std::array<std::shared_ptr<const ClassSpectrum>, 2> spectrum;
  std::array<double, 2> prior{0.5, 0.5};
  double gamma = 1.0;

  Index dim() const noexcept { return spectrum[0]->mean.size(); }
  /// Same decompositions, different regularizer.
  RQdaModel with_gamma(double g) const;
  /// log |H_i| = -sum_j log(1 + gamma s_{j,i}).
  double log_det_h(int cls) const;
  double eta() const;
};

RQdaModel train_rqda(std::shared_ptr<const ClassSpectrum> s0,
                     std::shared_ptr<const ClassSpectrum> s1, double gamma,
                     std::optional<std::array<double, 2>> priors = {});
/// Priors default to training proportions.
RQdaModel train_rqda(const MatrixXd& train0, const MatrixXd& train1, double gamma,
                     std::optional<std::array<double, 2>> priors = {});

/// eta - (x - xbar0)^T H0 (x - xbar0) / 2 + (x - xbar1)^T H1 (x - xbar1) / 2
/// with H_i = (I + gamma Sigma_hat_i)^{-1}.
double rqda_score(const RQdaModel& m, const Eigen::Ref<const VectorXd>& x);

/// 10^{i/10} for i = -10..10.
std::vector<double> default_gamma_grid();

enum class GammaSelection { test_oracle, k_fold };

struct GammaChoice {
  double gamma = 0.0;
  double error = 0.0;
  std::vector<double> errors;  // one per grid entry
};

/// Smallest error wins; ties go to the smaller gamma. `errors` must line up
/// with `grid`.
GammaChoice pick_gamma(const std::vector<double>& grid, const std::vector<double>& errors);

/// Test-oracle selection: error of every grid entry on `eval`.
GammaChoice select_gamma(const RQdaModel& base, const std::vector<double>& grid,
                         const LabeledDataset& eval);

/// k-fold selection using the training classes only.
GammaChoice select_gamma_kfold(const MatrixXd& train0, const MatrixXd& train1,
                               const std::vector<double>& grid, int folds, std::uint64_t seed,
                               std::optional<std::array<double, 2>> priors = {});

// ---------------------------------------------------------------------------
// Bayes rule with the true parameters

struct OracleQdaModel {
  std::array<ClassModel, 2> cls;
  double eta() const;
};

double oracle_qda_score(const OracleQdaModel& m, const Eigen::Ref<const VectorXd>& x);

// ---------------------------------------------------------------------------

/// Majority vote among the k nearest training rows (Euclidean); a tied vote
/// goes to the nearest neighbour. Distance ties are broken by row order.
int knn_classify(const LabeledDataset& train, const Eigen::Ref<const VectorXd>& x, Index k);

struct ErrorRates {
  double error = 0.0;
  std::array<double, 2> class_error{};
  std::array<Index, 2> count{};
};

/// error = pi0 eps0 + pi1 eps1 with the priors taken from the test split.
ErrorRates error_rates(const std::vector<int>& truth, const std::vector<int>& predicted);
ErrorRates evaluate(const std::function<int(const VectorXd&)>& classify,
                    const LabeledDataset& test);

}  // namespace sqda
