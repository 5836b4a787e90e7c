#include "sqda/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "sqda/errors.hpp"

namespace sqda {

ClassSpectrum decompose_class(const MatrixXd& data) {
  if (data.rows() < 2) throw InvalidArgument("class needs at least two samples");
  ClassSpectrum out;
  out.n = data.rows();
  const MatrixXd cov = sample_covariance(data, &out.mean);
  out.eigen = sym_eig_full(cov, cov.rows());
  return out;
}

NoiseRankEstimate estimate_noise_rank(const VectorXd& spectrum, double c, double delta) {
  const Index p = spectrum.size();
  if (p == 0) throw InvalidArgument("estimate_noise_rank: empty spectrum");
  const double edge = std::pow(1.0 + std::sqrt(c), 2) * (1.0 + delta);
  NoiseRankEstimate est;
  est.sigma2 = spectrum.mean();
  Index previous = -1;
  for (int it = 1; it <= 100; ++it) {
    est.iterations = it;
    const double threshold = est.sigma2 * edge;
    Index r = 0;
    while (r < p - 1 && spectrum[r] > threshold) ++r;
    est.r = r;
    est.sigma2 = spectrum.tail(p - r).mean();
    if (r == previous) {
      est.converged = true;
      break;
    }
    previous = r;
  }
  if (!(est.sigma2 > 0.0)) throw InvalidArgument("estimate_noise_rank: degenerate (zero) spectrum");
  return est;
}

ClassSummary summarize_class(const ClassSpectrum& spectrum, std::optional<double> sigma2,
                             std::optional<Index> r) {
  const Index p = spectrum.mean.size();
  if (spectrum.n < 2) throw InvalidArgument("summarize_class: need at least two samples");
  ClassSummary s;
  s.n = spectrum.n;
  s.c = static_cast<double>(p) / static_cast<double>(spectrum.n);
  s.mean = spectrum.mean;
  if (!sigma2 || !r) {
    const NoiseRankEstimate est = estimate_noise_rank(spectrum.eigen.values, s.c);
    s.estimated = true;
    s.converged = est.converged;
    if (!sigma2) sigma2 = est.sigma2;
    if (!r) r = est.r;
  }
  if (!(*sigma2 > 0.0)) throw InvalidArgument("summarize_class: sigma2 must be positive");
  if (*r < 0) throw InvalidArgument("summarize_class: negative spike count");
  s.sigma2 = *sigma2;
  s.r = std::min<Index>(*r, std::min<Index>(p, spectrum.eigen.vectors.cols()));
  s.eigen.values = spectrum.eigen.values;
  s.eigen.vectors = spectrum.eigen.vectors.leftCols(s.r);
  return s;
}

ClassSummary summarize_class(const MatrixXd& data, std::optional<double> sigma2,
                             std::optional<Index> r) {
  return summarize_class(decompose_class(data), sigma2, r);
}

double forward_spike_map(double lambda, double sigma2, double c) {
  return sigma2 * (1.0 + lambda) * (1.0 + c / lambda);
}

double invert_spike_map(double s, double sigma2, double c) {
  const double t = s / sigma2 - 1.0 - c;
  const double disc = t * t - 4.0 * c;
  // Exactly at the edge the discriminant is zero up to rounding.
  const double slack = 1e-12 * std::max(1.0, t * t);
  if (t < 0.0 || disc < -slack) {
    std::ostringstream msg;
    msg << "sample eigenvalue " << s << " is inside the noise bulk (edge "
        << sigma2 * std::pow(1.0 + std::sqrt(c), 2) << ")";
    throw SpikeUndetectableError(msg.str());
  }
  return 0.5 * (t + std::sqrt(std::max(disc, 0.0)));
}

double alignment_factor(double lambda, double c) {
  const double threshold = std::sqrt(c);
  if (lambda < threshold * (1.0 - 1e-12))
    throw InvalidArgument("alignment_factor: lambda below detectability threshold sqrt(c)");
  return std::max(0.0, (1.0 - c / (lambda * lambda)) / (1.0 + c / lambda));
}

namespace {

double psi_between(const MatrixXd& psi, int cls, Index own, Index other) {
  return cls == 1 ? psi(own, other) : psi(other, own);
}

}  // namespace

void fill_phi(SpikeEstimates& est) {
  for (int i = 0; i < 2; ++i) {
    const int o = 1 - i;
    est.phi[i].resize(est.rank(i));
    for (Index j = 0; j < est.rank(i); ++j) {
      double acc = 0.0;
      for (Index l = 0; l < est.rank(o); ++l) {
        const double psi = psi_between(est.psi, o, l, j);
        acc += est.lambda[o][l] * psi * psi;
      }
      est.phi[i][j] = 1.0 + est.a[i][j] * acc;
    }
  }
}

SpikeEstimates estimate_spikes(const ClassSummary& s0, const ClassSummary& s1,
                               double drop_margin) {
  if (s0.dim() != s1.dim()) throw DimensionError("estimate_spikes: class dimensions differ");
  const std::array<const ClassSummary*, 2> s{&s0, &s1};
  SpikeEstimates est;
  est.p = s0.dim();
  est.mu_hat = s0.mean - s1.mean;
  est.mu_hat_sq = est.mu_hat.squaredNorm();
  for (int i = 0; i < 2; ++i) {
    est.n[i] = s[i]->n;
    est.c[i] = s[i]->c;
    est.sigma2[i] = s[i]->sigma2;
  }
  est.separation = est.mu_hat_sq - est.c[1] * est.sigma2[1] - est.c[0] * est.sigma2[0];
  if (!(est.separation > 0.0)) {
    std::ostringstream msg;
    msg << "de-biased squared mean distance " << est.separation
        << " is not positive; classes are indistinguishable at this sample size";
    throw DegenerateSeparationError(msg.str());
  }
  if (est.separation < 1e-6) {
    est.warnings.push_back("de-biased squared mean distance clamped to 1e-6");
    est.separation = 1e-6;
  }

  for (int i = 0; i < 2; ++i) {
    const ClassSummary& cs = *s[i];
    const double c = cs.c;
    std::vector<double> kept;
    for (Index j = 0; j < cs.r; ++j) {
      const double s_j = cs.eigen.values[j];
      double lam = 0.0;
      try {
        lam = invert_spike_map(s_j, cs.sigma2, c);
      } catch (const SpikeUndetectableError&) {
        lam = 0.0;
      }
      if (!(lam > std::sqrt(c) * (1.0 + drop_margin))) {
        std::ostringstream msg;
        msg << "class " << i << ": dropped " << (cs.r - j)
            << " spike(s) at or below the detectability margin";
        est.warnings.push_back(msg.str());
        break;
      }
      kept.push_back(lam);
    }
    const Index r = static_cast<Index>(kept.size());
    est.lambda[i] = Eigen::Map<const VectorXd>(kept.data(), r);
    est.directions[i] = cs.eigen.vectors.leftCols(r);
    sign_align_columns(est.directions[i], est.mu_hat);
    est.a[i].resize(r);
    est.b[i].resize(r);
    for (Index j = 0; j < r; ++j) {
      est.a[i][j] = alignment_factor(est.lambda[i][j], c);
      const double proj = est.mu_hat.dot(est.directions[i].col(j));
      est.b[i][j] = proj * proj / (est.a[i][j] * est.separation);
    }
    est.alpha[i] = est.separation / est.sigma2[i];
    if (est.b[i].sum() > 1.1) {
      std::ostringstream msg;
      msg << "class " << i << ": projection weights sum to " << est.b[i].sum();
      est.warnings.push_back(msg.str());
    }
  }

  est.psi = est.directions[1].transpose() * est.directions[0];
  for (Index l = 0; l < est.psi.rows(); ++l)
    for (Index j = 0; j < est.psi.cols(); ++j)
      est.psi(l, j) = std::clamp(est.psi(l, j) / std::sqrt(est.a[1][l] * est.a[0][j]), -1.0, 1.0);
  fill_phi(est);
  return est;
}

}  // namespace sqda
