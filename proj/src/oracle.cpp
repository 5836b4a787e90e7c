#include "sqda/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sqda/errors.hpp"
#include "sqda/kernels.hpp"

namespace sqda::oracle {

namespace {

MatrixXd dense_sqrt(const SpikedCovariance& cov) {
  const Index p = cov.dim();
  MatrixXd out = MatrixXd::Identity(p, p);
  const auto& v = cov.directions();
  VectorXd scale(cov.rank());
  for (Index j = 0; j < cov.rank(); ++j) scale[j] = std::sqrt(1.0 + cov.lambdas()[j]) - 1.0;
  out += v * scale.asDiagonal() * v.transpose();
  return std::sqrt(cov.sigma2()) * out;
}

MatrixXd dense_precision(const ImpQdaModel::Side& s) {
  const Index p = s.mean.size();
  MatrixXd out = MatrixXd::Identity(p, p);
  out += s.directions * s.weights.asDiagonal() * s.directions.transpose();
  return out / s.sigma2;
}

}  // namespace

YiComponents y_components(const std::array<ClassModel, 2>& truth, const ImpQdaModel& fitted,
                          int cls) {
  const ClassModel& model = truth[cls];
  if (model.mean.size() != fitted.dim()) throw DimensionError("y_components: dimension mismatch");
  const MatrixXd root = dense_sqrt(model.cov);
  const MatrixXd c0 = dense_precision(fitted.side[0]);
  const MatrixXd c1 = dense_precision(fitted.side[1]);
  const VectorXd d0 = model.mean - fitted.side[0].mean;
  const VectorXd d1 = model.mean - fitted.side[1].mean;

  YiComponents out;
  out.B = root * (c1 - c0) * root;
  out.B = 0.5 * (out.B + out.B.transpose());
  out.y = root * (c1 * d1 - c0 * d0);
  out.xi = -2.0 * fitted.eta + d0.dot(c0 * d0) - d1.dot(c1 * d1);

  const auto& s0 = fitted.side[0];
  const auto& s1 = fitted.side[1];
  const Index r1 = s1.weights.size();
  const Index r0 = s0.weights.size();
  out.nu_weights.resize(r1 + r0);
  out.nu_directions.resize(fitted.dim(), r1 + r0);
  out.nu_weights.head(r1) = s1.weights / s1.sigma2;
  out.nu_weights.tail(r0) = -s0.weights / s0.sigma2;
  out.nu_directions.leftCols(r1) = s1.directions;
  out.nu_directions.rightCols(r0) = s0.directions;
  return out;
}

VectorXd YiComponents::z_tilde(const ClassModel& truth, const VectorXd& z) {
  return apply_sqrt(truth.cov, z);
}

double YiComponents::nu(const ClassModel& truth, const VectorXd& z) const {
  const VectorXd proj = nu_directions.transpose() * z_tilde(truth, z);
  return nu_weights.dot(proj.cwiseAbs2());
}

Moments empirical_moments(const YiComponents& comp, Index draws, std::uint64_t seed) {
  if (draws < 2) throw InvalidArgument("empirical_moments: need at least two draws");
  const Index p = comp.y.size();
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(draws));
  constexpr Index kBatch = 1000;
  for (Index done = 0; done < draws; done += kBatch) {
    const Index len = std::min(kBatch, draws - done);
    const MatrixXd z = rng.normal_matrix(len, p);
    const VectorXd quad = (z * comp.B).cwiseProduct(z).rowwise().sum();
    const VectorXd lin = z * comp.y;
    for (Index i = 0; i < len; ++i) values.push_back(quad[i] + 2.0 * lin[i] - comp.xi);
  }
  const double n = static_cast<double>(draws);
  Moments m;
  m.draws = draws;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m.variance = m2 / (n - 1.0);
  m4 /= n;
  m.mean_se = std::sqrt(m.variance / n);
  m.variance_se = std::sqrt(std::max(m4 - m.variance * m.variance, 0.0) / n);
  return m;
}

Moments empirical_moments(const std::array<ClassModel, 2>& truth, const ImpQdaModel& fitted,
                          int cls, Index draws, std::uint64_t seed) {
  return empirical_moments(y_components(truth, fitted, cls), draws, seed);
}

SpikeEstimates population_parameters(const std::array<ClassModel, 2>& truth, Index n0, Index n1) {
  const Index p = truth[0].mean.size();
  if (truth[1].mean.size() != p) throw DimensionError("population_parameters: dimension mismatch");
  SpikeEstimates est;
  est.p = p;
  est.n = {n0, n1};
  est.mu_hat = truth[0].mean - truth[1].mean;
  est.mu_hat_sq = est.mu_hat.squaredNorm();
  est.separation = est.mu_hat_sq;
  if (!(est.separation > 0.0)) throw DegenerateSeparationError("population_parameters: equal means");
  for (int i = 0; i < 2; ++i) {
    const SpikedCovariance& cov = truth[i].cov;
    est.c[i] = static_cast<double>(p) / static_cast<double>(est.n[i]);
    est.sigma2[i] = cov.sigma2();
    est.alpha[i] = est.separation / est.sigma2[i];
    Index r = 0;
    while (r < cov.rank() && cov.lambdas()[r] > std::sqrt(est.c[i])) ++r;
    if (r < cov.rank()) est.warnings.push_back("population spikes below sqrt(c) omitted");
    est.lambda[i] = cov.lambdas().head(r);
    est.directions[i] = cov.directions().leftCols(r);
    sign_align_columns(est.directions[i], est.mu_hat);
    est.a[i].resize(r);
    est.b[i].resize(r);
    for (Index j = 0; j < r; ++j) {
      est.a[i][j] = alignment_factor(est.lambda[i][j], est.c[i]);
      const double proj = est.mu_hat.dot(est.directions[i].col(j));
      est.b[i][j] = proj * proj / est.separation;
    }
  }
  est.psi = est.directions[1].transpose() * est.directions[0];
  fill_phi(est);
  return est;
}

namespace {

double safe_rho(const FisherProblem& f, const VectorXd& w) {
  const double den = w.dot(f.E * w) + 2.0 * f.e.dot(w) + f.b;
  if (!(den > 0.0) || !std::isfinite(den)) return -std::numeric_limits<double>::infinity();
  return std::abs(f.g.dot(w) + f.beta) / (2.0 * std::sqrt(den));
}

// Nelder-Mead maximization from x0 with initial edge length `step`.
VectorXd nelder_mead(const FisherProblem& f, VectorXd x0, double step, double tol, int max_iter) {
  const Index n = x0.size();
  std::vector<VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  for (Index j = 0; j < n; ++j) pts[static_cast<std::size_t>(j + 1)][j] += step;
  for (std::size_t i = 0; i < pts.size(); ++i) val[i] = -safe_rho(f, pts[i]);

  std::vector<std::size_t> order(pts.size());
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    const double spread = std::abs(val[worst] - val[best]);
    double size = 0.0;
    for (const auto& q : pts) size = std::max(size, (q - pts[best]).cwiseAbs().maxCoeff());
    if (spread <= tol * std::max(1e-300, std::abs(val[best])) &&
        size <= 1e-9 * (1.0 + pts[best].cwiseAbs().maxCoeff()))
      break;

    VectorXd centroid = VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const VectorXd refl = centroid + (centroid - pts[worst]);
    const double f_refl = -safe_rho(f, refl);
    if (f_refl < val[best]) {
      const VectorXd exp = centroid + 2.0 * (centroid - pts[worst]);
      const double f_exp = -safe_rho(f, exp);
      if (f_exp < f_refl) {
        pts[worst] = exp;
        val[worst] = f_exp;
      } else {
        pts[worst] = refl;
        val[worst] = f_refl;
      }
    } else if (f_refl < val[second]) {
      pts[worst] = refl;
      val[worst] = f_refl;
    } else {
      const bool outside = f_refl < val[worst];
      const VectorXd con = outside ? VectorXd(centroid + 0.5 * (refl - centroid))
                                   : VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double f_con = -safe_rho(f, con);
      if (f_con < std::min(f_refl, val[worst])) {
        pts[worst] = con;
        val[worst] = f_con;
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          val[i] = -safe_rho(f, pts[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < val.size(); ++i)
    if (val[i] < val[best]) best = i;
  return pts[best];
}

}  // namespace

NumericOptimum numeric_fisher_max(const FisherProblem& f, int restarts, double tol,
                                  std::uint64_t seed) {
  const Index n = f.g.size();
  NumericOptimum out;
  out.w = VectorXd::Zero(n);
  out.objective = safe_rho(f, out.w);
  if (n == 0) return out;
  Rng rng(seed);
  const double scales[] = {0.1, 1.0, 10.0};
  for (int r = 0; r < restarts; ++r) {
    const double scale = scales[r % 3];
    VectorXd x(n);
    for (Index j = 0; j < n; ++j) x[j] = scale * rng.normal();
    double current = safe_rho(f, x);
    double step = std::max(0.5, 0.25 * x.norm());
    // Restart the simplex at the incumbent until it stops improving.
    for (int round = 0; round < 50; ++round) {
      const VectorXd next = nelder_mead(f, x, step, tol, 20000);
      const double value = safe_rho(f, next);
      const bool improved = value > current * (1.0 + tol);
      if (value >= current) {
        x = next;
        current = value;
      }
      if (!improved && round > 0) break;
      step = std::max(1e-6, 0.1 * (1.0 + x.norm()) / (round + 1));
    }
    ++out.restarts;
    if (current > out.objective) {
      out.objective = current;
      out.w = x;
    }
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> emit_y_histogram_samples(
    const std::array<ClassModel, 2>& truth, const ImpQdaModel& fitted, Index per_class,
    std::uint64_t seed) {
  std::array<std::vector<double>, 2> out;
  for (int i = 0; i < 2; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const MatrixXd x = sample_class(truth[i], per_class, rng);
    const VectorXd scores = kernels::parallel::imp_qda_scores(fitted, x);
    out[i].resize(static_cast<std::size_t>(per_class));
    for (Index k = 0; k < per_class; ++k) out[i][static_cast<std::size_t>(k)] = 2.0 * scores[k];
  }
  return {std::move(out[0]), std::move(out[1])};
}

}  // namespace sqda::oracle
