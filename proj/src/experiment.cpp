#include "sqda/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

#include <omp.h>
#include <nlohmann/json.hpp>

#include "sqda/classifiers.hpp"
#include "sqda/errors.hpp"
#include "sqda/kernels.hpp"
#include "sqda/oracle.hpp"
#include "sqda/rmt.hpp"
#include "sqda/spectral.hpp"

namespace sqda {
namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

enum class Kind { imp, rqda, oracle, knn };

struct Classifier {
  Kind kind;
  Index k = 0;
  std::string name() const {
    switch (kind) {
      case Kind::imp: return "imp-qda";
      case Kind::rqda: return "r-qda";
      case Kind::oracle: return "oracle-qda";
      case Kind::knn: return "knn-" + std::to_string(k);
    }
    return "?";
  }
};

std::vector<Classifier> classifiers_for(const ExperimentConfig& cfg, bool synthetic) {
  std::vector<Classifier> out;
  if (cfg.include_imp) out.push_back({Kind::imp});
  if (cfg.include_rqda) out.push_back({Kind::rqda});
  if (synthetic && cfg.include_oracle) out.push_back({Kind::oracle});
  for (Index k : cfg.knn) out.push_back({Kind::knn, k});
  return out;
}

struct Trial {
  bool ok = false;
  double error = kNaN;
  std::array<double, 2> class_error{kNaN, kNaN};
  double gamma = kNaN;
  bool warned = false;
  double seconds = 0.0;
};

struct RepInput {
  MatrixXd train0;
  MatrixXd train1;
  LabeledDataset test;
  const std::array<ClassModel, 2>* truth = nullptr;
  ImpQdaOptions imp_opts;
  std::optional<std::array<double, 2>> priors;
  std::uint64_t seed = 0;
};

void record(Trial& t, const ErrorRates& e) {
  t.ok = true;
  t.error = e.error;
  t.class_error = e.class_error;
}

std::vector<Trial> evaluate_rep(const ExperimentConfig& cfg, const std::vector<Classifier>& clfs,
                                const RepInput& in) {
  std::vector<Trial> out(clfs.size());
  const auto needs_spectra = std::any_of(clfs.begin(), clfs.end(), [](const Classifier& c) {
    return c.kind == Kind::imp || c.kind == Kind::rqda;
  });

  std::shared_ptr<const ClassSpectrum> sp0, sp1;
  double decompose_seconds = 0.0;
  if (needs_spectra) {
    const auto t = Clock::now();
    try {
      sp0 = std::make_shared<const ClassSpectrum>(decompose_class(in.train0));
      sp1 = std::make_shared<const ClassSpectrum>(decompose_class(in.train1));
    } catch (const std::exception&) {
      sp0.reset();
      sp1.reset();
    }
    decompose_seconds = seconds_since(t);
  }

  for (std::size_t ci = 0; ci < clfs.size(); ++ci) {
    Trial& trial = out[ci];
    const auto t = Clock::now();
    try {
      switch (clfs[ci].kind) {
        case Kind::imp: {
          trial.seconds += decompose_seconds;
          if (!sp0) break;
          const ImpQdaModel m = train_imp_qda(*sp0, *sp1, in.imp_opts);
          trial.warned = !m.warnings.empty();
          record(trial, error_rates(in.test.labels, kernels::labels_of(
                                                        kernels::parallel::imp_qda_scores(m, in.test.samples))));
          break;
        }
        case Kind::rqda: {
          trial.seconds += decompose_seconds;
          if (!sp0) break;
          const RQdaModel base = train_rqda(sp0, sp1, cfg.gamma_grid.front(), in.priors);
          double gamma = 0.0;
          if (cfg.gamma_select == GammaSelection::k_fold) {
            gamma = select_gamma_kfold(in.train0, in.train1, cfg.gamma_grid, cfg.folds,
                                       derive_seed(in.seed, 1), in.priors)
                        .gamma;
          }
          const auto proj = kernels::parallel::ridge_project(base, in.test.samples);
          if (cfg.gamma_select == GammaSelection::test_oracle) {
            std::vector<double> errors;
            for (double g : cfg.gamma_grid) {
              errors.push_back(error_rates(in.test.labels,
                                           kernels::labels_of(kernels::rqda_scores(base.with_gamma(g), proj)))
                                   .error);
            }
            gamma = pick_gamma(cfg.gamma_grid, errors).gamma;
          }
          record(trial, error_rates(in.test.labels,
                                    kernels::labels_of(kernels::rqda_scores(base.with_gamma(gamma), proj))));
          trial.gamma = gamma;
          break;
        }
        case Kind::oracle: {
          const OracleQdaModel m{*in.truth};
          record(trial, error_rates(in.test.labels, kernels::labels_of(kernels::parallel::oracle_qda_scores(
                                                        m, in.test.samples))));
          break;
        }
        case Kind::knn: {
          LabeledDataset train;
          train.samples.resize(in.train0.rows() + in.train1.rows(), in.train0.cols());
          train.samples << in.train0, in.train1;
          train.labels.assign(static_cast<std::size_t>(in.train0.rows()), 0);
          train.labels.resize(static_cast<std::size_t>(train.samples.rows()), 1);
          record(trial, error_rates(in.test.labels,
                                    kernels::parallel::knn_predict(train, in.test.samples, clfs[ci].k)));
          break;
        }
      }
    } catch (const std::exception&) {
      trial.ok = false;
    }
    trial.seconds += seconds_since(t);
  }
  return out;
}

/// Runs `body(rep)` for every repetition, spreading repetitions over threads.
/// Results are stored by index, so the schedule never changes the report.
template <class Body>
std::vector<std::vector<Trial>> run_reps(const ExperimentConfig& cfg, Body body) {
  std::vector<std::vector<Trial>> trials(static_cast<std::size_t>(cfg.reps));
  const int threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long r = 0; r < cfg.reps; ++r) trials[static_cast<std::size_t>(r)] = body(r);
  return trials;
}

ReportCell aggregate(const std::string& name, Index n, Index p,
                     std::vector<std::pair<std::string, std::string>> extra,
                     const std::vector<std::vector<Trial>>& trials, std::size_t ci, bool with_gamma,
                     bool with_warnings) {
  ReportCell cell;
  cell.classifier = name;
  cell.n = n;
  cell.p = p;
  cell.reps = static_cast<long>(trials.size());
  double sum = 0.0;
  std::array<double, 2> class_sum{0.0, 0.0};
  long ok = 0;
  long warned = 0;
  std::vector<double> gammas;
  for (const auto& rep : trials) {
    const Trial& t = rep[ci];
    cell.seconds += t.seconds;
    if (!t.ok) {
      ++cell.failures;
      continue;
    }
    ++ok;
    sum += t.error;
    class_sum[0] += t.class_error[0];
    class_sum[1] += t.class_error[1];
    warned += t.warned;
    if (with_gamma) gammas.push_back(t.gamma);
  }
  cell.mean_error = ok ? sum / static_cast<double>(ok) : kNaN;
  double ss = 0.0;
  for (const auto& rep : trials) {
    if (rep[ci].ok) ss += (rep[ci].error - cell.mean_error) * (rep[ci].error - cell.mean_error);
  }
  cell.std_error = ok > 1 ? std::sqrt(ss / static_cast<double>(ok - 1)) : (ok == 1 ? 0.0 : kNaN);
  extra.emplace_back("err0", format_double(ok ? class_sum[0] / static_cast<double>(ok) : kNaN));
  extra.emplace_back("err1", format_double(ok ? class_sum[1] / static_cast<double>(ok) : kNaN));
  if (with_gamma && !gammas.empty()) {
    std::sort(gammas.begin(), gammas.end());
    const std::size_t m = gammas.size();
    const double med = m % 2 ? gammas[m / 2] : 0.5 * (gammas[m / 2 - 1] + gammas[m / 2]);
    extra.emplace_back("gamma_median", format_double(med));
  }
  if (with_warnings) extra.emplace_back("warned_reps", std::to_string(warned));
  cell.extra = std::move(extra);
  return cell;
}

void append_cells(ExperimentReport& report, const std::vector<Classifier>& clfs, Index n, Index p,
                  const std::vector<std::pair<std::string, std::string>>& common,
                  const std::vector<std::vector<Trial>>& trials, Variant variant) {
  for (std::size_t ci = 0; ci < clfs.size(); ++ci) {
    auto extra = common;
    if (clfs[ci].kind == Kind::imp)
      extra.emplace_back("variant", variant == Variant::general ? "general" : "simplified");
    report.cells.push_back(aggregate(clfs[ci].name(), n, p, std::move(extra), trials, ci,
                                     clfs[ci].kind == Kind::rqda, clfs[ci].kind == Kind::imp));
  }
}

std::array<Index, 2> halves(Index n) { return {n / 2, n - n / 2}; }

LabeledDataset stacked(const MatrixXd& x0, const MatrixXd& x1) {
  LabeledDataset d;
  d.samples.resize(x0.rows() + x1.rows(), x0.cols());
  d.samples << x0, x1;
  d.labels.assign(static_cast<std::size_t>(x0.rows()), 0);
  d.labels.resize(static_cast<std::size_t>(d.samples.rows()), 1);
  return d;
}

std::array<ClassModel, 2> synth_truth(const ExperimentConfig& cfg, double a, double s1) {
  auto [m0, m1] = synth_protocol_models(a, cfg.p, cfg.sigma0_sq, s1);
  return {std::move(m0), std::move(m1)};
}

ImpQdaOptions imp_options(const ExperimentConfig& cfg, const std::array<ClassModel, 2>* truth) {
  ImpQdaOptions o;
  o.variant = cfg.variant;
  if (truth && cfg.params == ParamMode::known) {
    for (int i = 0; i < 2; ++i) {
      o.sigma2[i] = (*truth)[i].cov.sigma2();
      o.rank[i] = (*truth)[i].cov.rank();
    }
  }
  return o;
}

}  // namespace

ExperimentReport run_synth(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto clfs = classifiers_for(cfg, true);
  ExperimentReport report;
  for (Index n : cfg.n) {
    for (double a : cfg.a) {
      for (double s1 : cfg.sigma1_sq) {
        const auto truth = synth_truth(cfg, a, s1);
        const auto ntrain = halves(n);
        const auto ntest = halves(cfg.test_size);
        auto trials = run_reps(cfg, [&](long rep) {
          Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(rep));
          RepInput in;
          in.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
          in.train0 = sample_class(truth[0], ntrain[0], rng);
          in.train1 = sample_class(truth[1], ntrain[1], rng);
          const MatrixXd t0 = sample_class(truth[0], ntest[0], rng);
          const MatrixXd t1 = sample_class(truth[1], ntest[1], rng);
          in.test = stacked(t0, t1);
          in.truth = &truth;
          in.imp_opts = imp_options(cfg, &truth);
          in.priors = std::array<double, 2>{truth[0].prior, truth[1].prior};
          return evaluate_rep(cfg, clfs, in);
        });
        const std::vector<std::pair<std::string, std::string>> common{
            {"a", format_double(a)},
            {"sigma0_sq", format_double(cfg.sigma0_sq)},
            {"sigma1_sq", format_double(s1)},
            {"params", cfg.params == ParamMode::known ? "known" : "estimated"},
            {"test_size", std::to_string(cfg.test_size)}};
        append_cells(report, clfs, n, cfg.p, common, trials, cfg.variant);
      }
    }
  }
  return report;
}

ExperimentReport run_real(const ExperimentConfig& cfg) {
  cfg.validate();
  const LabeledDataset data = ingest_dataset(cfg.dataset, cfg.schema);
  return run_real(cfg, data);
}

ExperimentReport run_real(const ExperimentConfig& cfg, const LabeledDataset& raw) {
  if (cfg.reps < 1) throw ConfigError("reps must be at least 1");
  if (cfg.n.empty()) throw ConfigError("n grid is empty");
  raw.validate();
  const std::array<Index, 2> have{raw.count(0), raw.count(1)};
  if (have[0] == 0 || have[1] == 0)
    throw DataError("dataset must contain both labels (found " + std::to_string(have[0]) + " and " +
                    std::to_string(have[1]) + " rows)");
  if (cfg.pca_dim > raw.dim())
    throw ConfigError("pca_dim " + std::to_string(cfg.pca_dim) + " exceeds the data dimension " +
                      std::to_string(raw.dim()));

  LabeledDataset once;
  const LabeledDataset* data = &raw;
  if (cfg.pca_dim > 0 && !cfg.pca_refit) {
    once.samples = Pca::fit(raw.samples, cfg.pca_dim).transform(raw.samples);
    once.labels = raw.labels;
    data = &once;
  }
  const bool refit = cfg.pca_dim > 0 && cfg.pca_refit;
  const Index p = cfg.pca_dim > 0 ? cfg.pca_dim : raw.dim();
  const auto clfs = classifiers_for(cfg, false);
  const double q0 = static_cast<double>(have[0]) / static_cast<double>(raw.size());

  ExperimentReport report;
  for (Index n : cfg.n) {
    if (n <= 0 || n >= raw.size())
      throw ConfigError("n = " + std::to_string(n) + " must be below the dataset size " +
                        std::to_string(raw.size()));
    const Index n0 = static_cast<Index>(std::floor(q0 * static_cast<double>(n)));
    const Index n1 = n - n0;
    if (n0 < 2 || n1 < 2)
      throw ConfigError("n = " + std::to_string(n) + " leaves fewer than two training rows in a class");
    if (n0 > have[0] || n1 > have[1])
      throw ConfigError("n = " + std::to_string(n) + " needs more rows than a class has");

    auto trials = run_reps(cfg, [&](long rep) {
      const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
      RepInput in;
      in.seed = seed;
      Split split = stratified_split(*data, n, seed);
      if (refit) {
        try {
          MatrixXd both(split.train0.rows() + split.train1.rows(), split.train0.cols());
          both << split.train0, split.train1;
          const Pca pca = Pca::fit(both, cfg.pca_dim);
          split.train0 = pca.transform(split.train0);
          split.train1 = pca.transform(split.train1);
          split.test.samples = pca.transform(split.test.samples);
        } catch (const std::exception&) {
          return std::vector<Trial>(clfs.size());
        }
      }
      in.train0 = std::move(split.train0);
      in.train1 = std::move(split.train1);
      in.test = std::move(split.test);
      in.imp_opts = imp_options(cfg, nullptr);
      if (cfg.priors == PriorMode::equal) in.priors = std::array<double, 2>{0.5, 0.5};
      return evaluate_rep(cfg, clfs, in);
    });
    const std::vector<std::pair<std::string, std::string>> common{
        {"n0", std::to_string(n0)},
        {"n1", std::to_string(n1)},
        {"test_size", std::to_string(raw.size() - n)},
        {"pca_dim", std::to_string(cfg.pca_dim)}};
    append_cells(report, clfs, n, p, common, trials, cfg.variant);
  }
  return report;
}

HistogramResult run_histogram(const ExperimentConfig& cfg) {
  cfg.validate();
  auto [m0, m1] = histogram_protocol_models(cfg.p);
  const std::array<ClassModel, 2> truth{std::move(m0), std::move(m1)};
  const auto ntrain = halves(cfg.n.front());
  Rng rng = Rng::stream(cfg.seed, 0);
  const MatrixXd x0 = sample_class(truth[0], ntrain[0], rng);
  const MatrixXd x1 = sample_class(truth[1], ntrain[1], rng);
  const ImpQdaModel fitted = train_imp_qda(x0, x1, imp_options(cfg, &truth));

  HistogramResult out;
  auto [y0, y1] = oracle::emit_y_histogram_samples(truth, fitted, cfg.hist_per_class,
                                                   derive_seed(cfg.seed, 1));
  out.y = {std::move(y0), std::move(y1)};
  for (int i = 0; i < 2; ++i) {
    out.m_bar[i] = m_bar(fitted.coeffs, fitted.w_star, fitted.eta, i);
    out.v_bar[i] = v_bar(fitted.coeffs, fitted.w_star, i);
  }
  return out;
}

void write_histogram(std::ostream& out, const HistogramResult& h, ReportFormat format) {
  if (format == ReportFormat::csv) out << "class,y\n";
  for (int i = 0; i < 2; ++i) {
    for (double y : h.y[i]) {
      if (format == ReportFormat::csv) {
        out << i << ',' << format_double(y) << '\n';
      } else {
        nlohmann::ordered_json row;
        row["class"] = i;
        row["y"] = y;
        out << row.dump() << '\n';
      }
    }
  }
}

SpectrumReport run_estimate(const ExperimentConfig& cfg) {
  cfg.validate();
  std::array<MatrixXd, 2> x;
  std::optional<std::array<ClassModel, 2>> truth;
  if (!cfg.dataset.empty()) {
    const LabeledDataset data = ingest_dataset(cfg.dataset, cfg.schema);
    for (int i = 0; i < 2; ++i) {
      x[i] = data.rows_of(i);
      if (x[i].rows() < 2)
        throw DataError("class " + std::to_string(i) + " has fewer than two rows");
    }
  } else {
    truth = synth_truth(cfg, cfg.a.front(), cfg.sigma1_sq.front());
    const auto ntrain = halves(cfg.n.front());
    Rng rng = Rng::stream(cfg.seed, 0);
    x[0] = sample_class((*truth)[0], ntrain[0], rng);
    x[1] = sample_class((*truth)[1], ntrain[1], rng);
  }

  SpectrumReport report;
  std::array<ClassSummary, 2> summary;
  for (int i = 0; i < 2; ++i) {
    std::optional<double> s2;
    std::optional<Index> r;
    if (truth && cfg.params == ParamMode::known) {
      s2 = (*truth)[i].cov.sigma2();
      r = (*truth)[i].cov.rank();
    }
    summary[i] = summarize_class(x[i], s2, r);
    if (summary[i].estimated && !summary[i].converged)
      report.warnings.push_back("class " + std::to_string(i) + ": noise/rank iteration did not converge");
  }
  std::optional<SpikeEstimates> est;
  try {
    est = estimate_spikes(summary[0], summary[1]);
    for (const auto& w : est->warnings) report.warnings.push_back(w);
  } catch (const Error& e) {
    report.warnings.push_back(std::string("joint estimates unavailable: ") + e.what());
  }

  for (int i = 0; i < 2; ++i) {
    const ClassSummary& s = summary[i];
    for (Index j = 0; j < s.r; ++j) {
      SpikeRow row;
      row.cls = i;
      row.n = s.n;
      row.p = s.dim();
      row.c = s.c;
      row.sigma2 = s.sigma2;
      row.rank = s.r;
      row.index = j;
      row.sample_eig = s.eigen.values[j];
      try {
        row.lambda = invert_spike_map(row.sample_eig, s.sigma2, s.c);
        row.alignment = alignment_factor(row.lambda, s.c);
      } catch (const Error&) {
        row.lambda = kNaN;
        row.alignment = kNaN;
      }
      if (est && j < est->rank(i)) row.b = est->b[i][j];
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_spectrum(std::ostream& out, const SpectrumReport& r, ReportFormat format) {
  if (format == ReportFormat::csv)
    out << "class,n,p,c,sigma2,rank,index,sample_eig,lambda,alignment,b\n";
  for (const auto& row : r.rows) {
    if (format == ReportFormat::csv) {
      out << row.cls << ',' << row.n << ',' << row.p << ',' << format_double(row.c) << ','
          << format_double(row.sigma2) << ',' << row.rank << ',' << row.index << ','
          << format_double(row.sample_eig) << ',' << format_double(row.lambda) << ','
          << format_double(row.alignment) << ',' << (row.b ? format_double(*row.b) : "") << '\n';
      continue;
    }
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["class"] = row.cls;
    j["n"] = row.n;
    j["p"] = row.p;
    j["c"] = num(row.c);
    j["sigma2"] = num(row.sigma2);
    j["rank"] = row.rank;
    j["index"] = row.index;
    j["sample_eig"] = num(row.sample_eig);
    j["lambda"] = num(row.lambda);
    j["alignment"] = num(row.alignment);
    j["b"] = row.b ? num(*row.b) : nlohmann::ordered_json();
    out << j.dump() << '\n';
  }
}

}  // namespace sqda
