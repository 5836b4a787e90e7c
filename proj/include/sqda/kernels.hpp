#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "sqda/classifiers.hpp"

// Batch scoring over the rows of a test matrix. Each kernel has a serial
// reference that simply loops over the per-point functions of
// classifiers.hpp, and an OpenMP version that splits the rows across threads.
// Both must agree to rounding; tests and the benchmark compare them.
namespace sqda::kernels {

/// Squared coordinates of each centred test row in each class's eigenbasis:
/// energy[i](row, j) = (u_{j,i}^T (x_row - xbar_i))^2. Scoring any gamma is
/// then a weighted row sum, so a whole grid costs one projection.
struct RidgeProjection {
  std::array<MatrixXd, 2> energy;
};

/// R-QDA scores for a given gamma from a cached projection.
VectorXd rqda_scores(const RQdaModel& m, const RidgeProjection& proj);

std::vector<int> labels_of(const VectorXd& scores);

namespace serial {
VectorXd imp_qda_scores(const ImpQdaModel& m, const MatrixXd& rows);
VectorXd oracle_qda_scores(const OracleQdaModel& m, const MatrixXd& rows);
RidgeProjection ridge_project(const RQdaModel& m, const MatrixXd& rows);
std::vector<int> knn_predict(const LabeledDataset& train, const MatrixXd& rows, Index k);
}  // namespace serial

namespace parallel {
VectorXd imp_qda_scores(const ImpQdaModel& m, const MatrixXd& rows);
VectorXd oracle_qda_scores(const OracleQdaModel& m, const MatrixXd& rows);
RidgeProjection ridge_project(const RQdaModel& m, const MatrixXd& rows);
std::vector<int> knn_predict(const LabeledDataset& train, const MatrixXd& rows, Index k);
}  // namespace parallel

}  // namespace sqda::kernels
