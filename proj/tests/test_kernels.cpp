#include <doctest.h>

#include <memory>

#include "alloc_probe.hpp"
#include "sqda/classifiers.hpp"
#include "sqda/kernels.hpp"
#include "support.hpp"

using namespace sqda;

namespace {

ImpQdaModel random_model(Index p, Index r, Rng& rng) {
  ImpQdaModel m;
  for (int i = 0; i < 2; ++i) {
    m.side[i].mean = VectorXd(p);
    for (Index j = 0; j < p; ++j) m.side[i].mean[j] = 0.1 * rng.normal();
    m.side[i].sigma2 = 0.8 + 0.4 * rng.uniform();
    m.side[i].directions = testing::random_orthonormal(p, r, rng);
    m.side[i].weights = VectorXd::LinSpaced(r, -0.7, 0.4);
  }
  m.eta = 0.3;
  return m;
}

}  // namespace

TEST_CASE("imp-QDA kernels agree with the per-point score") {
  Rng rng(1);
  const auto m = random_model(80, 3, rng);
  const MatrixXd rows = rng.normal_matrix(300, 80);
  const VectorXd s = kernels::serial::imp_qda_scores(m, rows);
  const VectorXd p = kernels::parallel::imp_qda_scores(m, rows);
  for (Index i = 0; i < rows.rows(); ++i) {
    CHECK(s[i] == doctest::Approx(imp_qda_score(m, rows.row(i).transpose())).epsilon(1e-12));
    CHECK(std::abs(s[i] - p[i]) <= 1e-10 * (1.0 + std::abs(s[i])));
  }
  CHECK(kernels::labels_of(s) == kernels::labels_of(p));
}

TEST_CASE("oracle kernels agree") {
  Rng rng(2);
  const auto c0 = testing::random_spiked(40, 2, 1.0, rng);
  const auto c1 = testing::random_spiked(40, 3, 1.5, rng);
  OracleQdaModel m{{ClassModel{VectorXd::Constant(40, 0.2), c0, 0.4},
                    ClassModel{VectorXd::Constant(40, -0.2), c1, 0.6}}};
  const MatrixXd rows = rng.normal_matrix(200, 40);
  const VectorXd s = kernels::serial::oracle_qda_scores(m, rows);
  const VectorXd p = kernels::parallel::oracle_qda_scores(m, rows);
  CHECK((s - p).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + s.cwiseAbs().maxCoeff()));
}

TEST_CASE("ridge projections agree and reproduce rqda_score") {
  Rng rng(3);
  const MatrixXd x0 = rng.normal_matrix(30, 25), x1 = rng.normal_matrix(40, 25) * 1.5;
  const auto m = train_rqda(x0, x1, 0.5);
  const MatrixXd rows = rng.normal_matrix(150, 25);
  const auto s = kernels::serial::ridge_project(m, rows);
  const auto p = kernels::parallel::ridge_project(m, rows);
  for (int i = 0; i < 2; ++i) CHECK((s.energy[i] - p.energy[i]).cwiseAbs().maxCoeff() < 1e-10);
  for (double g : default_gamma_grid()) {
    const auto mg = m.with_gamma(g);
    const VectorXd batch = kernels::rqda_scores(mg, p);
    for (Index r = 0; r < rows.rows(); r += 7)
      CHECK(std::abs(batch[r] - rqda_score(mg, rows.row(r).transpose())) <=
            1e-9 * (1.0 + std::abs(batch[r])));
  }
}

TEST_CASE("knn kernels agree with knn_classify") {
  Rng rng(4);
  LabeledDataset train;
  train.samples = rng.normal_matrix(120, 10);
  for (Index i = 0; i < 120; ++i) train.labels.push_back(static_cast<int>(i % 2));
  train.samples.bottomRows(60).array() += 0.3;
  const MatrixXd rows = rng.normal_matrix(300, 10);
  for (Index k : {1, 4, 5, 120}) {
    const auto s = kernels::serial::knn_predict(train, rows, k);
    const auto p = kernels::parallel::knn_predict(train, rows, k);
    CHECK(s == p);
    for (Index i = 0; i < 300; i += 17)
      CHECK(s[static_cast<std::size_t>(i)] == knn_classify(train, rows.row(i).transpose(), k));
  }
}

TEST_CASE("imp-QDA scoring never allocates a p x p block (p = 10000)") {
  const Index p = 10000;
  Rng rng(5);
  const auto m = random_model(p, 3, rng);
  const MatrixXd rows = rng.normal_matrix(256, p);
  const std::size_t pp = static_cast<std::size_t>(p) * static_cast<std::size_t>(p) * sizeof(double);
  {
    alloc_probe::Scope probe;
    const VectorXd s = kernels::parallel::imp_qda_scores(m, rows);
    const VectorXd t = kernels::serial::imp_qda_scores(m, rows);
    volatile double sink = imp_qda_score(m, rows.row(0).transpose()) + s[0] + t[0];
    (void)sink;
  }
  CHECK(alloc_probe::count > 0);
  CHECK(alloc_probe::largest < pp);
  // one centred block of at most 128 rows is the biggest temporary
  CHECK(alloc_probe::largest <= 128 * static_cast<std::size_t>(p) * sizeof(double) + 4096);
}
