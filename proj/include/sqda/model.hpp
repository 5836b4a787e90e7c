#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sqda {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Covariance of the form sigma2 * (I + sum_j lambda_j v_j v_j^T) with
/// orthonormal v_j. Stored in O(p r); never expanded inside classifiers.
class SpikedCovariance {
 public:
  SpikedCovariance() = default;

  /// Validates positivity, descending order and orthonormality (1e-10).
  SpikedCovariance(double sigma2, VectorXd lambdas, MatrixXd directions);

  static SpikedCovariance isotropic(Index dim, double sigma2);

  double sigma2() const noexcept { return sigma2_; }
  const VectorXd& lambdas() const noexcept { return lambdas_; }
  const MatrixXd& directions() const noexcept { return directions_; }
  Index dim() const noexcept { return directions_.rows(); }
  Index rank() const noexcept { return lambdas_.size(); }

  /// log |Sigma| = p log sigma2 + sum_j log(1 + lambda_j).
  double log_det() const;

  /// Sigma^{-1} x in O(p r).
  VectorXd apply_inverse(const Eigen::Ref<const VectorXd>& x) const;

 private:
  double sigma2_ = 1.0;
  VectorXd lambdas_;
  MatrixXd directions_;
};

/// Dense p x p matrix. Test and small-p use only.
MatrixXd materialize_covariance(const SpikedCovariance& cov);

/// Sigma^{1/2} x = sigma (x + sum_j (sqrt(1+lambda_j) - 1)(v_j^T x) v_j).
VectorXd apply_sqrt(const SpikedCovariance& cov, const Eigen::Ref<const VectorXd>& x);

/// Applies Sigma^{1/2} to every row of `rows` in place.
void apply_sqrt_rows(const SpikedCovariance& cov, MatrixXd& rows);

struct ClassModel {
  VectorXd mean;
  SpikedCovariance cov;
  double prior = 0.5;
};

/// Samples in rows with labels in {0, 1}.
struct LabeledDataset {
  MatrixXd samples;
  std::vector<int> labels;

  Index size() const noexcept { return samples.rows(); }
  Index dim() const noexcept { return samples.cols(); }
  Index count(int label) const;
  /// Rows carrying `label`, in original order.
  MatrixXd rows_of(int label) const;
  /// Throws InvalidArgument on a label outside {0, 1}.
  void validate() const;
};

/// Splittable seed: every (master, stream) pair maps to an independent
/// 64-bit seed through splitmix64, so parallel repetitions never share state.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng stream(std::uint64_t master, std::uint64_t index) {
    return Rng(derive_seed(master, index));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

  /// n x p matrix of i.i.d. standard normals, filled row by row.
  MatrixXd normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// n i.i.d. rows from N(mean, cov).
MatrixXd sample_class(const ClassModel& model, Index n, Rng& rng);
MatrixXd sample_class(const ClassModel& model, Index n, std::uint64_t seed);

/// Two-class synthetic protocol: V0 = e1..e3 with lambda (5,4,3), V1 = e4..e6
/// with lambda (6,5,4), mu0 = (a / sqrt p) 1, mu1 = -mu0, equal priors.
std::pair<ClassModel, ClassModel> synth_protocol_models(double a, Index p, double sigma0_sq,
                                                        double sigma1_sq);

/// Histogram configuration: lambda (4,3,2) for both classes on the same
/// orthogonal axis blocks, mu0 = -mu1 = (4 / sqrt p) 1, sigma0^2 = sigma1^2 = 1.
std::pair<ClassModel, ClassModel> histogram_protocol_models(Index p);

}  // namespace sqda
