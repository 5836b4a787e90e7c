#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

#include <CLI11.hpp>

#include "sqda/config.hpp"
#include "sqda/errors.hpp"
#include "sqda/experiment.hpp"

namespace {

struct Flag {
  const char* key;
  const char* help;
};

// Flags mirror the config-file keys one to one.
const Flag kFlags[] = {
    {"p", "feature dimension (synthetic)"},
    {"n", "total training size; comma list for a sweep"},
    {"a", "mean scale; comma list"},
    {"sigma0_sq", "class-0 noise variance (synthetic)"},
    {"sigma1_sq", "class-1 noise variance; comma list"},
    {"test_size", "synthetic test samples per repetition"},
    {"params", "known | estimated noise variance and spike count"},
    {"imp", "run Imp-QDA (true/false)"},
    {"rqda", "run R-QDA (true/false)"},
    {"oracle", "also run QDA with the true parameters (synthetic)"},
    {"variant", "general | simplified Imp-QDA coefficients"},
    {"gammas", "R-QDA gamma grid, comma list or 'default'"},
    {"gamma_select", "oracle | kfold"},
    {"folds", "folds for kfold gamma selection"},
    {"knn", "k values for nearest-neighbour baselines, comma list"},
    {"priors", "R-QDA priors on real data: training | equal"},
    {"dataset", "data file"},
    {"labels", "separate label file, one label per line"},
    {"delimiter", "comma | semicolon | whitespace"},
    {"label_column", "label column, negative counts from the end"},
    {"skip_columns", "columns to ignore, comma list"},
    {"header", "first line is a header (true/false)"},
    {"label_map", "raw:label pairs, e.g. 4:0,5:1"},
    {"drop_unmapped", "drop rows whose label is not in label_map"},
    {"pca_dim", "PCA target dimension, 0 = off"},
    {"pca_fit", "per_rep | once"},
    {"hist_per_class", "histogram draws per class"},
    {"workers", "OpenMP threads for repetitions, 0 = default"},
    {"seed", "master seed"},
    {"reps", "repetitions"},
    {"out", "output file (default stdout)"},
    {"format", "csv | jsonl"},
};

std::string flag_name(std::string key) {
  std::string dashed = key;
  for (char& ch : dashed)
    if (ch == '_') ch = '-';
  return dashed == key ? "--" + key : "--" + dashed + ",--" + key;
}

template <class Write>
void with_output(const sqda::ExperimentConfig& cfg, Write write) {
  if (cfg.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw sqda::DataError("cannot write " + cfg.out);
  write(out);
  out.flush();
  if (!out) throw sqda::DataError("error while writing " + cfg.out);
}

void summarize(const sqda::ExperimentReport& report) {
  for (const auto& c : report.cells) {
    std::cerr << c.classifier << " n=" << c.n << " p=" << c.p << ": " << c.mean_error << " (sd "
              << c.std_error << ", " << c.failures << "/" << c.reps << " failed)\n";
  }
}

void moments(const std::vector<double>& y, double& mean, double& var) {
  mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size() > 1 ? y.size() - 1 : 1);
}

int run(const sqda::ExperimentConfig& cfg) {
  using sqda::Mode;
  switch (cfg.mode) {
    case Mode::synthetic:
    case Mode::real: {
      const auto report = cfg.mode == Mode::synthetic ? sqda::run_synth(cfg) : sqda::run_real(cfg);
      with_output(cfg, [&](std::ostream& o) { sqda::write_report(o, report, cfg.format); });
      summarize(report);
      break;
    }
    case Mode::histogram: {
      const auto h = sqda::run_histogram(cfg);
      with_output(cfg, [&](std::ostream& o) { sqda::write_histogram(o, h, cfg.format); });
      for (int i = 0; i < 2; ++i) {
        double mean = 0.0, var = 0.0;
        moments(h.y[i], mean, var);
        std::cerr << "Y" << i << ": mean " << mean << " (equivalent " << h.m_bar[i] << "), variance "
                  << var << " (equivalent " << h.v_bar[i] << ")\n";
      }
      break;
    }
    case Mode::estimate: {
      const auto r = sqda::run_estimate(cfg);
      with_output(cfg, [&](std::ostream& o) { sqda::write_spectrum(o, r, cfg.format); });
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiked-covariance QDA experiments"};
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::map<CLI::App*, std::vector<std::pair<std::string, CLI::Option*>>> bound;
  std::string config_path;
  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Monte Carlo sweep on the synthetic two-class protocol"},
      {"real", "repeated random splits of a labelled dataset"},
      {"histogram", "score samples of one trained classifier, for plotting"},
      {"estimate", "noise level and spike estimates of a dataset"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value file; flags override it");
    for (const Flag& f : kFlags)
      bound[sub].emplace_back(f.key, sub->add_option(flag_name(f.key), values[f.key], f.help));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    sqda::ExperimentConfig cfg;
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) sqda::load_config_file(cfg, config_path);
    for (const auto& [key, opt] : bound[sub])
      if (opt->count() > 0) sqda::apply_setting(cfg, key, values[key]);
    cfg.mode = sqda::parse_mode(sub->get_name());
    cfg.validate();
    return run(cfg);
  } catch (const sqda::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const sqda::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << '\n';
    return 3;
  }
}
