#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sqda/classifiers.hpp"
#include "sqda/equivalents.hpp"
#include "sqda/model.hpp"

// Brute-force verifiers. Everything here may build dense p x p matrices and
// is meant for tests, the acceptance suite and the histogram subcommand.
namespace sqda::oracle {

/// Y_i(z) = z^T B z + 2 y^T z - xi for x = mu_i + Sigma_i^{1/2} z.
struct YiComponents {
  MatrixXd B;
  VectorXd y;
  double xi = 0.0;
  /// Per-spike weights of the nu_i term, class-1 spikes first. Paired with
  /// `nu_directions` (columns) and scaled by +1/sigma1^2 or -1/sigma0^2.
  VectorXd nu_weights;
  MatrixXd nu_directions;

  double evaluate(const VectorXd& z) const { return z.dot(B * z) + 2.0 * y.dot(z) - xi; }
  /// z_tilde = Sigma_i^{1/2} z.
  static VectorXd z_tilde(const ClassModel& truth, const VectorXd& z);
  /// nu_i(z) = sum_j nu_weights_j (z_tilde^T u_j)^2.
  double nu(const ClassModel& truth, const VectorXd& z) const;
};

YiComponents y_components(const std::array<ClassModel, 2>& truth, const ImpQdaModel& fitted,
                          int cls);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  Index draws = 0;
};

/// Monte Carlo mean and variance of Y_i using the dense components.
Moments empirical_moments(const YiComponents& comp, Index draws, std::uint64_t seed);
Moments empirical_moments(const std::array<ClassModel, 2>& truth, const ImpQdaModel& fitted,
                          int cls, Index draws, std::uint64_t seed);

/// Spike statistics computed from the true models (lambda, a(lambda, c),
/// b, psi, alpha) for class sizes n0, n1. Directions are the population
/// ones, signed to have non-negative inner product with mu1 - mu0.
SpikeEstimates population_parameters(const std::array<ClassModel, 2>& truth, Index n0, Index n1);

struct NumericOptimum {
  VectorXd w;
  double objective = 0.0;
  int restarts = 0;
};

/// Multi-start Nelder-Mead ascent on rho_bar. Independent of the closed form.
NumericOptimum numeric_fisher_max(const FisherProblem& f, int restarts = 16, double tol = 1e-10,
                                  std::uint64_t seed = 7);

/// Y_0 and Y_1 samples: 2 * score(x) for fresh test draws from each class.
std::pair<std::vector<double>, std::vector<double>> emit_y_histogram_samples(
    const std::array<ClassModel, 2>& truth, const ImpQdaModel& fitted, Index per_class,
    std::uint64_t seed);

}  // namespace sqda::oracle
