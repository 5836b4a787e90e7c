// Acceptance suite: one PASS / FAIL / SKIP line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "alloc_probe.hpp"
#include "sqda/classifiers.hpp"
#include "sqda/errors.hpp"
#include "sqda/experiment.hpp"
#include "sqda/kernels.hpp"
#include "sqda/oracle.hpp"
#include "support.hpp"

using namespace sqda;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
  if (o.verdict == Verdict::fail) ++failures;
  std::printf("%s  criterion %d  %-44s %s\n", tag, id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

const ReportCell& cell(const ExperimentReport& r, const std::string& clf, const std::string& s1) {
  for (const auto& c : r.cells) {
    if (c.classifier != clf) continue;
    for (const auto& [k, v] : c.extra)
      if (k == "sigma1_sq" && v == s1) return c;
  }
  throw std::runtime_error("missing cell " + clf + " sigma1_sq=" + s1);
}

// Random estimates in the shape the classifier produces, r0 + r1 <= 6.
SpikeEstimates random_estimates(Rng& rng) {
  SpikeEstimates e;
  e.p = 500;
  const std::array<Index, 2> r{1 + static_cast<Index>(rng.uniform() * 3),
                               1 + static_cast<Index>(rng.uniform() * 3)};
  for (int i = 0; i < 2; ++i) {
    e.c[i] = 0.3 + 0.9 * rng.uniform();
    e.n[i] = static_cast<Index>(e.p / e.c[i]);
    e.sigma2[i] = 0.7 + 0.8 * rng.uniform();
    e.lambda[i].resize(r[i]);
    e.a[i].resize(r[i]);
    e.b[i].resize(r[i]);
    for (Index j = 0; j < r[i]; ++j) {
      e.lambda[i][j] = 2.0 + 6.0 * rng.uniform();
      e.a[i][j] = alignment_factor(e.lambda[i][j], e.c[i]);
      e.b[i][j] = 0.25 * rng.uniform();
    }
    std::sort(e.lambda[i].data(), e.lambda[i].data() + r[i], std::greater<>());
  }
  e.psi = MatrixXd(r[1], r[0]);
  for (Index l = 0; l < r[1]; ++l)
    for (Index j = 0; j < r[0]; ++j) e.psi(l, j) = 0.8 * (rng.uniform() - 0.5);
  const double sep = 0.5 + 3.0 * rng.uniform();
  e.alpha = {sep / e.sigma2[0], sep / e.sigma2[1]};
  fill_phi(e);
  return e;
}

// Criteria 1-3 share one sweep over sigma1^2.
ExperimentReport synthetic_sweep(long reps, std::uint64_t seed, double& seconds) {
  ExperimentConfig cfg;
  cfg.p = 500;
  cfg.n = {1000};
  cfg.a = {0.5};
  cfg.sigma0_sq = 1.0;
  cfg.sigma1_sq = {1.0, 1.5, 2.0};
  cfg.reps = reps;
  cfg.test_size = 2000;
  cfg.seed = seed;
  const auto t = Clock::now();
  auto r = run_synth(cfg);
  seconds = seconds_since(t);
  return r;
}

Outcome criterion_fisher(std::uint64_t seed) {
  Rng rng(seed);
  const auto t = Clock::now();
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const auto k = assemble_coefficients(random_estimates(rng));
    if (k.jittered) continue;  // SPD instances only
    const auto f = fisher_problem(k);
    const auto closed = optimal_w(f);
    const auto num = oracle::numeric_fisher_max(f);
    worst = std::max(worst, std::abs(num.objective - closed.objective) / closed.objective);
    ++done;
  }
  const double secs = seconds_since(t);
  const bool ok = worst <= 1e-6 && secs <= 60.0;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("worst relative gap %.2e over 100 instances (limit 1e-6), %.1f s (limit 60 s)", worst, secs)};
}

Outcome criterion_moments(std::uint64_t seed) {
  const auto [m0, m1] = synth_protocol_models(0.5, 500, 1.0, 1.0);
  const std::array<ClassModel, 2> truth{m0, m1};
  Rng rng = Rng::stream(seed, 0);
  const MatrixXd x0 = sample_class(m0, 500, rng), x1 = sample_class(m1, 500, rng);
  ImpQdaOptions o;
  o.sigma2 = {1.0, 1.0};
  o.rank = {Index{3}, Index{3}};
  const auto fit = train_imp_qda(x0, x1, o);
  const auto k = assemble_coefficients(oracle::population_parameters(truth, 500, 500));
  std::array<double, 2> mb, vb;
  std::array<oracle::Moments, 2> emp;
  for (int i = 0; i < 2; ++i) {
    mb[i] = m_bar(k, fit.w_star, fit.eta, i);
    vb[i] = v_bar(k, fit.w_star, i);
    emp[i] = oracle::empirical_moments(truth, fit, i, 10000, derive_seed(seed, 10 + i));
  }
  const double gap = std::abs(mb[0] - mb[1]);
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 2; ++i) {
    const double dm = std::abs(emp[i].mean - mb[i]) / gap;
    const double dv = std::abs(emp[i].variance - vb[i]) / vb[i];
    ok = ok && dm <= 0.05 && dv <= 0.10;
    detail += "Y" + std::to_string(i) + fmt(": mean %.3f vs %.3f (%.4f of gap), ", emp[i].mean, mb[i], dm) +
              fmt("var %.2f vs %.2f (rel %.4f)", emp[i].variance, vb[i], dv) + (i == 0 ? "; " : "");
  }
  return {ok ? Verdict::pass : Verdict::fail, detail + " (limits 0.05, 0.10)"};
}

Outcome criterion_spikes(std::uint64_t seed) {
  const Index p = 1000, n = 2000;
  const double lam = 4.0, c = 0.5;
  ClassModel m{VectorXd::Zero(p), SpikedCovariance(1.0, VectorXd::Constant(1, lam), MatrixXd::Identity(p, 1)),
               0.5};
  double rel = 0.0, align = 0.0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const auto summary = summarize_class(sample_class(m, n, derive_seed(seed, s)), 1.0, Index{1});
    const double est = invert_spike_map(summary.eigen.values[0], 1.0, summary.c);
    rel += std::abs(est / lam - 1.0) / seeds;
    const double dot = summary.eigen.vectors(0, 0);
    align += dot * dot / seeds;
  }
  const double target = alignment_factor(lam, c);
  const bool ok = rel <= 0.05 && within(align, target, 0.02);
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("mean |lambda_hat/lambda - 1| %.4f (limit 0.05), mean (u.v)^2 %.4f vs %.4f +- 0.02", rel, align,
              target)};
}

Outcome criterion_identities(std::uint64_t seed) {
  Rng rng(seed);
  double worst_y = 0.0, worst_m = 0.0;
  for (int t = 0; t < 100; ++t) {
    // fitted on data from random spiked populations
    const Index p = 40 + 4 * (t % 10);
    std::array<ClassModel, 2> truth;
    for (int i = 0; i < 2; ++i) {
      VectorXd mean(p);
      for (Index j = 0; j < p; ++j) mean[j] = (i == 0 ? 0.25 : -0.25) + 0.05 * rng.normal();
      truth[i] = ClassModel{mean, testing::random_spiked(p, 1 + (t + i) % 3, 0.8 + 0.4 * i, rng), 0.5};
    }
    const MatrixXd x0 = sample_class(truth[0], 3 * p, rng), x1 = sample_class(truth[1], 3 * p, rng);
    ImpQdaModel fit;
    try {
      ImpQdaOptions o;
      o.sigma2 = {truth[0].cov.sigma2(), truth[1].cov.sigma2()};
      o.rank = {truth[0].cov.rank(), truth[1].cov.rank()};
      fit = train_imp_qda(x0, x1, o);
    } catch (const Error&) {
      --t;
      continue;
    }
    const int i = t % 2;
    const auto comp = oracle::y_components(truth, fit, i);
    VectorXd z(p);
    for (Index j = 0; j < p; ++j) z[j] = rng.normal();
    const double two = 2.0 * imp_qda_score(fit, truth[i].mean + apply_sqrt(truth[i].cov, z));
    worst_y = std::max(worst_y, std::abs(comp.evaluate(z) - two) / std::max(1.0, std::abs(two)));

    const auto k = assemble_coefficients(random_estimates(rng));
    const VectorXd w = optimal_w(k).w;
    const double eta = optimal_eta(k, w);
    worst_m = std::max(worst_m, std::abs(m_bar(k, w, eta, 0) + m_bar(k, w, eta, 1)));
  }
  const bool ok = worst_y <= 1e-8 && worst_m <= 1e-9;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("max |Y - 2 score| (relative) %.2e (limit 1e-8), max |m0 + m1| %.2e (limit 1e-9)", worst_y,
              worst_m)};
}

Outcome criterion_scoring(std::uint64_t seed) {
  const Index p = 500;
  const auto [m0, m1] = synth_protocol_models(0.5, p, 1.0, 1.0);
  Rng rng = Rng::stream(seed, 0);
  const MatrixXd x0 = sample_class(m0, 500, rng), x1 = sample_class(m1, 500, rng);
  ImpQdaOptions o;
  o.sigma2 = {1.0, 1.0};
  o.rank = {Index{3}, Index{3}};
  const auto fit = train_imp_qda(x0, x1, o);
  MatrixXd test(2000, p);
  test << sample_class(m0, 1000, rng), sample_class(m1, 1000, rng);

  const std::size_t pp = static_cast<std::size_t>(p * p) * sizeof(double);
  double secs = 0.0, serial_secs = 0.0;
  std::size_t largest = 0;
  VectorXd scores, serial;
  {
    alloc_probe::Scope probe;
    auto t = Clock::now();
    scores = kernels::parallel::imp_qda_scores(fit, test);
    secs = seconds_since(t);
    t = Clock::now();
    serial = kernels::serial::imp_qda_scores(fit, test);
    serial_secs = seconds_since(t);
    largest = alloc_probe::largest;
  }
  const bool same = (scores - serial).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + serial.cwiseAbs().maxCoeff());
  const bool ok = largest < pp && secs <= 1.0 && serial_secs <= 1.0 && same;
  std::ostringstream d;
  d << "largest block " << largest << " B vs p x p " << pp << " B; sweep " << fmt("%.4f s (serial %.4f s)", secs, serial_secs)
    << " (limit 1 s)";
  return {ok ? Verdict::pass : Verdict::fail, d.str()};
}

struct RealTarget {
  double imp, rqda, tol;
};

Outcome real_run(ExperimentConfig cfg, const RealTarget& target) {
  const auto t = Clock::now();
  const auto r = run_real(cfg);
  double imp = -1, rq = -1;
  long fail = 0;
  for (const auto& c : r.cells) {
    if (c.classifier == "imp-qda") imp = c.mean_error;
    if (c.classifier == "r-qda") rq = c.mean_error;
    fail += c.failures;
  }
  const bool ok = within(imp, target.imp, target.tol) && within(rq, target.rqda, target.tol);
  std::ostringstream d;
  d << fmt("Imp-QDA %.4f (target %.3f +- %.3f), R-QDA %.4f", imp, target.imp, target.tol, rq)
    << fmt(" (target %.3f +- %.3f), %.0f failed reps, %.0f s", target.rqda, target.tol, static_cast<double>(fail),
           seconds_since(t));
  return {ok ? Verdict::pass : Verdict::fail, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string data_dir = "data";
  long reps = 100;
  long real_reps = 50;
  std::uint64_t seed = 20240601;
  std::set<int> only;
  app.add_option("--data-dir", data_dir, "directory holding the optional real datasets");
  app.add_option("--reps", reps, "repetitions for the synthetic criteria");
  app.add_option("--real-reps", real_reps, "repetitions for the dataset criteria");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };
  auto guarded = [&](int id, const std::string& name, const std::function<Outcome()>& body) {
    if (!wanted(id)) return;
    try {
      report(id, name, body());
    } catch (const std::exception& e) {
      report(id, name, {Verdict::fail, std::string("exception: ") + e.what()});
    }
  };

  if (wanted(1) || wanted(2) || wanted(3)) {
    double secs = 0.0;
    ExperimentReport sweep;
    std::string error;
    try {
      sweep = synthetic_sweep(reps, seed, secs);
    } catch (const std::exception& e) {
      error = e.what();
    }
    auto pair = [&](const std::string& s1) {
      return std::pair{cell(sweep, "imp-qda", s1), cell(sweep, "r-qda", s1)};
    };
    guarded(1, "synthetic sweep, sigma1^2 = 1", [&] {
      if (!error.empty()) throw std::runtime_error(error);
      const auto [imp, rq] = pair("1");
      // the sweep covers three columns; a third of it is this criterion's cost
      const double own = secs / 3.0;
      const bool ok = within(imp.mean_error, 0.130, 0.015) && within(rq.mean_error, 0.240, 0.020) &&
                      own <= 900.0 && imp.failures == 0 && rq.failures == 0;
      return Outcome{ok ? Verdict::pass : Verdict::fail,
                     fmt("Imp-QDA %.4f (0.130 +- 0.015), R-QDA %.4f (0.240 +- 0.020), %.0f s", imp.mean_error,
                         rq.mean_error, own) +
                         ", reps " + std::to_string(imp.reps)};
    });
    guarded(2, "synthetic sweep, sigma1^2 = 1.5", [&] {
      if (!error.empty()) throw std::runtime_error(error);
      const auto [imp, rq] = pair("1.5");
      const bool ok = imp.mean_error <= 0.01 && within(rq.mean_error, 0.102, 0.025) && imp.failures == 0;
      return Outcome{ok ? Verdict::pass : Verdict::fail,
                     fmt("Imp-QDA %.4f (<= 0.01), R-QDA %.4f (0.102 +- 0.025)", imp.mean_error, rq.mean_error)};
    });
    guarded(3, "synthetic sweep, sigma1^2 = 2", [&] {
      if (!error.empty()) throw std::runtime_error(error);
      const auto [imp, rq] = pair("2");
      const bool ok = imp.mean_error <= 0.002 && within(rq.mean_error, 0.013, 0.01) && imp.failures == 0;
      return Outcome{ok ? Verdict::pass : Verdict::fail,
                     fmt("Imp-QDA %.4f (<= 0.002), R-QDA %.4f (0.013 +- 0.01)", imp.mean_error, rq.mean_error)};
    });
  }
  guarded(4, "closed-form optimum vs numeric maximizer", [&] { return criterion_fisher(seed); });
  guarded(5, "asymptotic moments vs Monte Carlo", [&] { return criterion_moments(seed); });
  guarded(6, "spike estimator consistency", [&] { return criterion_spikes(seed); });
  guarded(7, "algebraic identities", [&] { return criterion_identities(seed); });
  guarded(8, "scoring path: memory and speed", [&] { return criterion_scoring(seed); });

  guarded(9, "EEG classes 4 vs 5, n = 2000", [&] {
    const fs::path file = fs::path(data_dir) / "eeg.csv";
    if (!fs::exists(file)) return Outcome{Verdict::skip, "no " + file.string() + " (see README)"};
    ExperimentConfig cfg;
    cfg.mode = Mode::real;
    cfg.dataset = file.string();
    cfg.schema.header = true;
    cfg.schema.skip_columns = {0};
    cfg.schema.label_column = -1;
    cfg.schema.label_map = parse_label_map("4:0,5:1");
    cfg.schema.drop_unmapped = true;
    cfg.n = {2000};
    cfg.reps = real_reps;
    cfg.seed = seed;
    return real_run(cfg, {0.267, 0.327, 0.02});
  });
  guarded(9, "Gisette after PCA to 98 dims, n = 700", [&] {
    const fs::path file = fs::path(data_dir) / "gisette.data";
    const fs::path labels = fs::path(data_dir) / "gisette.labels";
    if (!fs::exists(file) || !fs::exists(labels))
      return Outcome{Verdict::skip, "no " + file.string() + " / " + labels.string() + " (see README)"};
    ExperimentConfig cfg;
    cfg.mode = Mode::real;
    cfg.dataset = file.string();
    cfg.schema.delimiter = ' ';
    cfg.schema.labels_path = labels.string();
    cfg.schema.label_map = parse_label_map("-1:0,1:1");
    cfg.pca_dim = 98;
    cfg.n = {700};
    cfg.reps = real_reps;
    cfg.seed = seed;
    return real_run(cfg, {0.046, 0.071, 0.015});
  });

  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
