#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqda/spectral.hpp"

namespace sqda {

/// Mean and full eigendecomposition of one class's sample covariance.
/// Computed once and shared by every classifier trained on the class.
struct ClassSpectrum {
  Index n = 0;
  VectorXd mean;
  EigenPairs eigen;  // all p values and all p vectors, descending
};

/// Throws InvalidArgument when the class has fewer than two rows.
ClassSpectrum decompose_class(const MatrixXd& data);

struct NoiseRankEstimate {
  double sigma2 = 0.0;
  Index r = 0;
  bool converged = false;
  int iterations = 0;
};

/// Fixed-point noise/rank estimate. Starting from the mean of all values,
/// alternates r = #{s_j > sigma2 (1 + sqrt c)^2 (1 + delta)} and
/// sigma2 = mean of the p - r smallest values until r repeats. Gives up after
/// 100 rounds and reports converged = false.
NoiseRankEstimate estimate_noise_rank(const VectorXd& spectrum, double c, double delta = 0.1);

struct ClassSummary {
  Index n = 0;
  double c = 0.0;  // p / n
  VectorXd mean;
  EigenPairs eigen;  // full values, leading r vectors
  double sigma2 = 1.0;
  Index r = 0;
  bool estimated = false;  // sigma2 / r came from estimate_noise_rank
  bool converged = true;

  Index dim() const noexcept { return mean.size(); }
};

ClassSummary summarize_class(const ClassSpectrum& spectrum, std::optional<double> sigma2 = {},
                             std::optional<Index> r = {});
ClassSummary summarize_class(const MatrixXd& data, std::optional<double> sigma2 = {},
                             std::optional<Index> r = {});

/// Limit of the sample spike eigenvalue: s = sigma2 (1 + lambda)(1 + c / lambda).
double forward_spike_map(double lambda, double sigma2, double c);

/// Inverse of forward_spike_map on the detectable branch lambda >= sqrt c.
/// With t = s / sigma2 - 1 - c, returns (t + sqrt(t^2 - 4c)) / 2.
/// Throws SpikeUndetectableError below the bulk edge (1 + sqrt c)^2.
double invert_spike_map(double s, double sigma2, double c);

/// Squared cosine between sample and population spike directions:
/// (1 - c / lambda^2) / (1 + c / lambda). Zero at the threshold lambda = sqrt c;
/// throws InvalidArgument below it.
double alignment_factor(double lambda, double c);

/// Plug-in spike statistics for a pair of classes. Index 0 and 1 refer to
/// the class. The same structure carries population values when built from
/// known models (see oracle.hpp).
struct SpikeEstimates {
  Index p = 0;
  std::array<Index, 2> n{};
  std::array<double, 2> c{};
  std::array<double, 2> sigma2{};
  std::array<double, 2> alpha{};
  std::array<VectorXd, 2> lambda;
  std::array<VectorXd, 2> a;
  std::array<VectorXd, 2> b;
  std::array<VectorXd, 2> phi;
  /// psi(l, j) pairs spike l of class 1 with spike j of class 0.
  MatrixXd psi;
  /// Retained sample eigenvectors, signed so that mu_hat^T u >= 0.
  std::array<MatrixXd, 2> directions;
  VectorXd mu_hat;  // xbar0 - xbar1
  double mu_hat_sq = 0.0;
  double separation = 0.0;  // ||mu_hat||^2 - c1 sigma1^2 - c0 sigma0^2
  std::vector<std::string> warnings;

  Index rank(int cls) const noexcept { return lambda[cls].size(); }
};

/// phi_{j,i} = 1 + a_{j,i} sum_l lambda_{l,other} psi^2, filled in place from
/// lambda, a and psi.
void fill_phi(SpikeEstimates& est);

/// Consistent estimators of lambda, alpha, b and psi from two summaries.
/// Spikes with lambda_hat <= sqrt(c) (1 + drop_margin), or whose sample value
/// sits inside the bulk, are dropped with a warning.
SpikeEstimates estimate_spikes(const ClassSummary& s0, const ClassSummary& s1,
                               double drop_margin = 0.05);

}  // namespace sqda
