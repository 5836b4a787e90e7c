#include <doctest.h>

#include "sqda/errors.hpp"
#include "sqda/model.hpp"
#include "sqda/spectral.hpp"
#include "support.hpp"

using namespace sqda;

TEST_CASE("materialize: isotropic and axis-aligned spikes") {
  const auto iso = SpikedCovariance::isotropic(3, 1.0);
  CHECK(materialize_covariance(iso).isApprox(MatrixXd::Identity(3, 3)));

  const SpikedCovariance one(2.0, VectorXd::Constant(1, 3.0), MatrixXd::Identity(2, 1));
  const MatrixXd m = materialize_covariance(one);
  CHECK(m(0, 0) == doctest::Approx(8.0));
  CHECK(m(1, 1) == doctest::Approx(2.0));
  CHECK(m(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("materialize: protocol class-0 covariance has top eigenvalues 6, 5, 4") {
  const auto [m0, m1] = synth_protocol_models(0.5, 50, 1.0, 1.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(materialize_covariance(m0.cov));
  const VectorXd ev = es.eigenvalues().reverse();
  CHECK(ev[0] == doctest::Approx(6.0));
  CHECK(ev[1] == doctest::Approx(5.0));
  CHECK(ev[2] == doctest::Approx(4.0));
  for (Index j = 3; j < 50; ++j) CHECK(ev[j] == doctest::Approx(1.0));
}

TEST_CASE("materialize: spectrum is sigma2 (1 + lambda) plus the flat part") {
  Rng rng(11);
  const auto cov = testing::random_spiked(40, 4, 1.7, rng);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(materialize_covariance(cov));
  const VectorXd ev = es.eigenvalues().reverse();
  for (Index j = 0; j < 4; ++j) CHECK(std::abs(ev[j] - 1.7 * (1.0 + cov.lambdas()[j])) < 1e-8);
  for (Index j = 4; j < 40; ++j) CHECK(std::abs(ev[j] - 1.7) < 1e-8);
}

TEST_CASE("constructor rejects invalid spikes") {
  MatrixXd v = MatrixXd::Identity(4, 2);
  CHECK_THROWS_AS(SpikedCovariance(-1.0, VectorXd::Ones(2), v), InvalidArgument);
  CHECK_THROWS_AS(SpikedCovariance(1.0, VectorXd::Constant(2, -1.0), v), InvalidArgument);
  VectorXd asc(2);
  asc << 1.0, 2.0;
  CHECK_THROWS_AS(SpikedCovariance(1.0, asc, v), InvalidArgument);
  v(0, 1) = 0.1;
  CHECK_THROWS(SpikedCovariance(1.0, VectorXd::Ones(2), v));
  CHECK_THROWS_AS(SpikedCovariance(1.0, VectorXd::Ones(3), MatrixXd::Identity(4, 2)), DimensionError);
}

TEST_CASE("apply_sqrt: examples and dense square root") {
  const auto iso = SpikedCovariance::isotropic(5, 4.0);
  const VectorXd x = VectorXd::LinSpaced(5, -1.0, 3.0);
  CHECK((apply_sqrt(iso, x) - 2.0 * x).norm() < 1e-12);

  const SpikedCovariance one(1.0, VectorXd::Constant(1, 3.0), MatrixXd::Identity(4, 1));
  const VectorXd e1 = VectorXd::Unit(4, 0);
  CHECK((apply_sqrt(one, e1) - 2.0 * e1).norm() < 1e-12);

  Rng rng(3);
  const auto cov = testing::random_spiked(30, 3, 2.5, rng);
  const MatrixXd root = testing::dense_sqrt(materialize_covariance(cov));
  for (int t = 0; t < 10; ++t) {
    VectorXd z(30);
    for (Index i = 0; i < 30; ++i) z[i] = rng.normal();
    CHECK((apply_sqrt(cov, z) - root * z).norm() < 1e-8 * (1.0 + z.norm()));
  }
}

TEST_CASE("apply_sqrt is linear") {
  Rng rng(5);
  const auto cov = testing::random_spiked(25, 2, 0.7, rng);
  VectorXd x(25), y(25);
  for (Index i = 0; i < 25; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  const double a = 1.3, b = -0.4;
  const VectorXd lhs = apply_sqrt(cov, a * x + b * y);
  const VectorXd rhs = a * apply_sqrt(cov, x) + b * apply_sqrt(cov, y);
  CHECK((lhs - rhs).norm() < 1e-10);
}

TEST_CASE("apply_inverse and log_det match the dense matrix") {
  Rng rng(8);
  const auto cov = testing::random_spiked(20, 3, 1.4, rng);
  const MatrixXd dense = materialize_covariance(cov);
  VectorXd x(20);
  for (Index i = 0; i < 20; ++i) x[i] = rng.normal();
  CHECK((cov.apply_inverse(x) - dense.ldlt().solve(x)).norm() < 1e-10);
  CHECK(cov.log_det() == doctest::Approx(std::log(dense.determinant())).epsilon(1e-10));
}

TEST_CASE("sample_class: means, trace, determinism") {
  ClassModel m{VectorXd::LinSpaced(4, -1.0, 2.0), SpikedCovariance::isotropic(4, 1.0), 0.5};
  const MatrixXd x = sample_class(m, 100000, 17);
  const VectorXd mean = x.colwise().mean();
  for (Index j = 0; j < 4; ++j) CHECK(std::abs(mean[j] - m.mean[j]) < 3.0 / std::sqrt(1e5));

  ClassModel z{VectorXd::Zero(50), SpikedCovariance::isotropic(50, 1.0), 0.5};
  const MatrixXd y = sample_class(z, 2000, 4);
  const double tr = sample_covariance(y).trace() / 50.0;
  CHECK(std::abs(tr - 1.0) < 0.02);

  const MatrixXd a = sample_class(z, 30, 99);
  const MatrixXd b = sample_class(z, 30, 99);
  CHECK(a == b);
  CHECK(a != sample_class(z, 30, 100));
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("synth protocol geometry") {
  const auto [m0, m1] = synth_protocol_models(0.5, 500, 1.0, 1.5);
  CHECK(m0.mean.norm() == doctest::Approx(0.5));
  CHECK((m1.mean - m0.mean).norm() == doctest::Approx(1.0));
  const auto [n0, n1] = synth_protocol_models(0.8, 500, 1.0, 1.0);
  CHECK((n1.mean - n0.mean).norm() == doctest::Approx(1.6));
  CHECK((m0.cov.directions().transpose() * m1.cov.directions()).norm() == doctest::Approx(0.0));
  CHECK(m1.cov.sigma2() == 1.5);
  CHECK(m0.cov.lambdas()[0] == 5.0);
  CHECK(m1.cov.lambdas()[0] == 6.0);
}

TEST_CASE("histogram configuration") {
  const auto [m0, m1] = histogram_protocol_models(100);
  CHECK(m0.mean.norm() == doctest::Approx(4.0));
  CHECK((m0.mean + m1.mean).norm() == doctest::Approx(0.0));
  CHECK(m0.cov.lambdas() == m1.cov.lambdas());
}

TEST_CASE("dataset helpers") {
  LabeledDataset d;
  d.samples = MatrixXd::Zero(4, 2);
  d.samples.col(0) << 1, 2, 3, 4;
  d.labels = {0, 1, 1, 0};
  CHECK(d.count(0) == 2);
  const MatrixXd r = d.rows_of(1);
  CHECK(r(0, 0) == 2.0);
  CHECK(r(1, 0) == 3.0);
  d.labels[2] = 2;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}
