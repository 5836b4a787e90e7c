#include "sqda/equivalents.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sqda/errors.hpp"

namespace sqda {

namespace {

// Offset of class `cls` spikes in the w layout (class 1 first).
Index offset(const EquivalentCoefficients& k, int cls) { return cls == 1 ? 0 : k.r1; }

double psi_between(const MatrixXd& psi, int cls, Index own, Index other) {
  return cls == 1 ? psi(own, other) : psi(other, own);
}

}  // namespace

EquivalentCoefficients assemble_coefficients(const SpikeEstimates& est, Variant variant) {
  EquivalentCoefficients k;
  k.variant = variant;
  k.p = est.p;
  k.r0 = est.rank(0);
  k.r1 = est.rank(1);
  k.c = est.c;
  k.sigma2 = est.sigma2;
  k.alpha = est.alpha;
  if (est.psi.rows() != k.r1 || est.psi.cols() != k.r0)
    throw DimensionError("assemble_coefficients: psi must be r1 x r0");
  const double pd = static_cast<double>(est.p);
  const Index r = k.size();

  for (int i = 0; i < 2; ++i) {
    const int o = 1 - i;
    // sigma_i^2 / sigma_other^2, set to 1 in the simplified variant.
    const double ratio = variant == Variant::general ? est.sigma2[i] / est.sigma2[o] : 1.0;
    const Index own = offset(k, i);
    const Index oth = offset(k, o);
    const auto& lam_i = est.lambda[i];
    const auto& a_i = est.a[i];
    const auto& b_i = est.b[i];
    const auto& a_o = est.a[o];
    const auto& b_o = est.b[o];
    const auto& phi_o = est.phi[o];
    const double alpha_o = est.alpha[o];

    k.beta[i] = est.alpha[i] + pd * (est.sigma2[i] / est.sigma2[o] - 1.0);
    k.b[i] = alpha_o * ratio * (1.0 + lam_i.dot(b_i)) + est.c[o] * ratio * ratio + est.c[i];

    VectorXd g = VectorXd::Zero(r);
    VectorXd e = VectorXd::Zero(r);
    MatrixXd E = MatrixXd::Zero(r, r);
    const double own_sign = i == 1 ? 1.0 : -1.0;

    for (Index j = 0; j < est.rank(i); ++j) {
      const double gain = 1.0 + lam_i[j] * a_i[j];
      g[own + j] = own_sign * gain;
      E(own + j, own + j) = 0.5 * gain * gain;
    }
    for (Index j = 0; j < est.rank(o); ++j) {
      g[oth + j] = -own_sign * (alpha_o * a_o[j] * b_o[j] + ratio * phi_o[j]);

      double cross = 0.0;
      for (Index l = 0; l < est.rank(i); ++l)
        cross += lam_i[l] * a_o[j] * std::sqrt(b_o[j] * b_i[l]) * psi_between(est.psi, i, l, j);
      e[oth + j] = alpha_o * ratio * (a_o[j] * b_o[j] + cross);

      E(oth + j, oth + j) += 0.5 * ratio * ratio * phi_o[j] * phi_o[j] + ratio * alpha_o * a_o[j] * b_o[j];
      for (Index m = 0; m < est.rank(o); ++m) {
        double s = 0.0;
        for (Index l = 0; l < est.rank(i); ++l)
          s += lam_i[l] * psi_between(est.psi, i, l, j) * psi_between(est.psi, i, l, m);
        E(oth + j, oth + m) += alpha_o * ratio * a_o[j] * a_o[m] * std::sqrt(b_o[j] * b_o[m]) * s;
      }
      for (Index l = 0; l < est.rank(i); ++l) {
        const double psi = psi_between(est.psi, i, l, j);
        const double n_lj =
            -0.5 * ratio * std::pow(1.0 + lam_i[l], 2) * a_i[l] * a_o[j] * psi * psi;
        E(own + l, oth + j) = n_lj;
        E(oth + j, own + l) = n_lj;
      }
    }
    k.g[i] = std::move(g);
    k.e[i] = std::move(e);
    k.E[i] = 0.5 * (E + E.transpose());
  }

  if (r > 0) {
    const MatrixXd total = k.E[0] + k.E[1];
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(total, Eigen::EigenvaluesOnly);
    const double norm = solver.eigenvalues().cwiseAbs().maxCoeff();
    const double floor = 1e-10 * std::max(norm, 1e-300);
    const double lowest = solver.eigenvalues().minCoeff();
    if (lowest < floor) {
      const double jitter = floor - lowest;
      k.E[0].diagonal().array() += 0.5 * jitter;
      k.E[1].diagonal().array() += 0.5 * jitter;
      k.jittered = true;
      std::ostringstream msg;
      msg << "E not positive definite (min eigenvalue " << lowest << "); added jitter " << jitter;
      k.warnings.push_back(msg.str());
    }
  }
  return k;
}

EquivalentCoefficients assemble_coefficients(const SpikeEstimates& est, const ClassSummary& s0,
                                             const ClassSummary& s1, Variant variant) {
  if (s0.dim() != est.p || s1.dim() != est.p)
    throw DimensionError("assemble_coefficients: summaries do not match estimates");
  return assemble_coefficients(est, variant);
}

double m_bar(const EquivalentCoefficients& k, const VectorXd& w, double eta, int cls) {
  if (w.size() != k.size()) throw DimensionError("m_bar: w has the wrong length");
  const int o = 1 - cls;
  const double s2 = k.sigma2[cls];
  const double sign = cls == 0 ? 1.0 : -1.0;
  return 2.0 * eta + k.c[1] - k.c[0] +
         static_cast<double>(k.p) * (s2 / k.sigma2[1] - s2 / k.sigma2[0]) + sign * k.alpha[o] +
         k.g[cls].dot(w);
}

double v_bar(const EquivalentCoefficients& k, const VectorXd& w, int cls) {
  if (w.size() != k.size()) throw DimensionError("v_bar: w has the wrong length");
  const double v = 4.0 * (w.dot(k.E[cls] * w) + 2.0 * k.e[cls].dot(w) + k.b[cls]);
  if (!(v > 0.0)) throw VarianceDegeneracyError("v_bar: asymptotic variance is not positive");
  return v;
}

FisherProblem fisher_problem(const EquivalentCoefficients& k) {
  FisherProblem f;
  f.g = k.g[0] - k.g[1];
  f.e = k.e[0] + k.e[1];
  f.E = k.E[0] + k.E[1];
  f.b = k.b[0] + k.b[1];
  f.beta = k.beta[0] + k.beta[1];
  return f;
}

double rho_bar(const FisherProblem& f, const VectorXd& w) {
  if (w.size() != f.g.size()) throw DimensionError("rho_bar: w has the wrong length");
  const double den = w.dot(f.E * w) + 2.0 * f.e.dot(w) + f.b;
  if (!(den > 0.0)) throw VarianceDegeneracyError("rho_bar: variance term is not positive");
  return std::abs(f.g.dot(w) + f.beta) / (2.0 * std::sqrt(den));
}

double rho_bar(const EquivalentCoefficients& k, const VectorXd& w) {
  return rho_bar(fisher_problem(k), w);
}

FisherOptimum optimal_w(const FisherProblem& f) {
  const Index r = f.g.size();
  if (f.e.size() != r || f.E.rows() != r || f.E.cols() != r)
    throw DimensionError("optimal_w: inconsistent problem dimensions");
  VectorXd einv_g = VectorXd::Zero(r);
  VectorXd einv_e = VectorXd::Zero(r);
  if (r > 0) {
    const MatrixXd sym = 0.5 * (f.E + f.E.transpose());
    Eigen::LLT<MatrixXd> llt(sym);
    if (llt.info() != Eigen::Success)
      throw VarianceDegeneracyError("optimal_w: E is not positive definite");
    einv_g = llt.solve(f.g);
    einv_e = llt.solve(f.e);
  }
  const double g_einv_e = f.g.dot(einv_e);
  FisherOptimum out;
  out.d = f.beta - g_einv_e;
  out.residual = f.b - f.e.dot(einv_e);
  if (std::abs(out.d) <= 1e-12 * (std::abs(f.beta) + std::abs(g_einv_e) + 1.0))
    throw DegenerateObjectiveError("optimal_w: beta - g^T E^{-1} e vanishes; no finite maximizer");
  if (!(out.residual > 0.0))
    throw VarianceDegeneracyError("optimal_w: b - e^T E^{-1} e is not positive");
  // The signed quotient keeps the optimum on the side of the numerator's sign.
  out.theta = out.residual / out.d;
  out.w = out.theta * einv_g - einv_e;
  out.objective = rho_bar(f, out.w);
  return out;
}

FisherOptimum optimal_w(const EquivalentCoefficients& k) { return optimal_w(fisher_problem(k)); }

double optimal_eta(const EquivalentCoefficients& k, const VectorXd& w_star) {
  if (w_star.size() != k.size()) throw DimensionError("optimal_eta: w has the wrong length");
  const double s0 = k.sigma2[0];
  const double s1 = k.sigma2[1];
  return -0.25 * ((k.g[0] + k.g[1]).dot(w_star) + k.alpha[1] - k.alpha[0] +
                  2.0 * (k.c[1] - k.c[0]) +
                  static_cast<double>(k.p) * (s0 * s0 - s1 * s1) / (s0 * s1));
}

}  // namespace sqda
