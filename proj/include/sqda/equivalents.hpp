#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqda/rmt.hpp"

namespace sqda {

enum class Variant { general, simplified };

/// Deterministic-equivalent coefficients of the class-conditional mean and
/// variance of the improved-QDA statistic. Vector layout is
/// [w_{1,1} .. w_{r1,1}, w_{1,0} .. w_{r0,0}]: class-1 spikes first.
struct EquivalentCoefficients {
  Variant variant = Variant::general;
  Index p = 0;
  Index r0 = 0;
  Index r1 = 0;
  std::array<double, 2> c{};
  std::array<double, 2> sigma2{};
  std::array<double, 2> alpha{};
  std::array<double, 2> beta{};
  std::array<double, 2> b{};
  std::array<VectorXd, 2> g;
  std::array<VectorXd, 2> e;
  std::array<MatrixXd, 2> E;
  bool jittered = false;
  std::vector<std::string> warnings;

  Index size() const noexcept { return r0 + r1; }
};

EquivalentCoefficients assemble_coefficients(const SpikeEstimates& est,
                                             Variant variant = Variant::general);
/// Checks that the summaries match the estimates, then assembles.
EquivalentCoefficients assemble_coefficients(const SpikeEstimates& est, const ClassSummary& s0,
                                             const ClassSummary& s1,
                                             Variant variant = Variant::general);

/// Asymptotic mean of the class-`cls` statistic.
double m_bar(const EquivalentCoefficients& k, const VectorXd& w, double eta, int cls);

/// Asymptotic variance 4 (w^T E_i w + 2 e_i^T w + b_i). Throws
/// VarianceDegeneracyError when not positive.
double v_bar(const EquivalentCoefficients& k, const VectorXd& w, int cls);

/// The reduced objective |g^T w + beta| / (2 sqrt(w^T E w + 2 e^T w + b)),
/// with g = g0 - g1, e = e0 + e1, E = E0 + E1, b = b0 + b1, beta = beta0 + beta1.
struct FisherProblem {
  VectorXd g;
  VectorXd e;
  MatrixXd E;
  double b = 0.0;
  double beta = 0.0;
};

FisherProblem fisher_problem(const EquivalentCoefficients& k);

double rho_bar(const FisherProblem& f, const VectorXd& w);
double rho_bar(const EquivalentCoefficients& k, const VectorXd& w);

struct FisherOptimum {
  VectorXd w;
  double theta = 0.0;
  double d = 0.0;          // beta - g^T E^{-1} e
  double residual = 0.0;   // b - e^T E^{-1} e
  double objective = 0.0;  // rho_bar(w)
};

/// Closed-form maximizer w = E^{-1}(theta g - e), theta = (b - e^T E^{-1} e) / d.
FisherOptimum optimal_w(const FisherProblem& f);
FisherOptimum optimal_w(const EquivalentCoefficients& k);

/// Bias that centres the two asymptotic means: m0(w, eta) + m1(w, eta) = 0.
double optimal_eta(const EquivalentCoefficients& k, const VectorXd& w_star);

}  // namespace sqda
