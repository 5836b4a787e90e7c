#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqda/classifiers.hpp"
#include "sqda/dataset.hpp"
#include "sqda/equivalents.hpp"
#include "sqda/report.hpp"

namespace sqda {

enum class Mode { synthetic, real, histogram, estimate };
enum class ParamMode { known, estimated };
enum class PriorMode { training, equal };

/// Everything a run needs. Every field can be set from a `key = value` file
/// or from the matching `--key` flag; see `config_keys()`.
struct ExperimentConfig {
  Mode mode = Mode::synthetic;

  // synthetic / histogram
  Index p = 500;
  std::vector<Index> n{1000};  // total training size, split by the priors
  std::vector<double> a{0.5};
  double sigma0_sq = 1.0;
  std::vector<double> sigma1_sq{1.0};
  Index test_size = 2000;
  ParamMode params = ParamMode::known;
  bool include_oracle = false;
  Index hist_per_class = 10000;

  long reps = 250;
  std::uint64_t seed = 1;

  // classifiers
  bool include_imp = true;
  bool include_rqda = true;
  Variant variant = Variant::general;
  std::vector<double> gamma_grid = default_gamma_grid();
  GammaSelection gamma_select = GammaSelection::test_oracle;
  int folds = 5;
  std::vector<Index> knn;
  PriorMode priors = PriorMode::training;

  // real / estimate
  std::string dataset;
  DatasetSchema schema;
  Index pca_dim = 0;  // 0 = no PCA
  bool pca_refit = true;  // false: one PCA fit on the full dataset

  // output
  std::string out;  // empty = stdout
  ReportFormat format = ReportFormat::csv;
  int workers = 0;  // 0 = OpenMP default

  /// Throws ConfigError.
  void validate() const;
};

/// Keys understood by `apply_setting`, in documentation order.
const std::vector<std::string>& config_keys();

/// Throws ConfigError on an unknown key or a value that does not parse.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key = value` lines. Blank lines and lines starting with '#' are
/// skipped. Later keys override earlier ones.
void load_config_file(ExperimentConfig& cfg, const std::string& path);

Mode parse_mode(const std::string& name);
std::string to_string(Mode m);

}  // namespace sqda
