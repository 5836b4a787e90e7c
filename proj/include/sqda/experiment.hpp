#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqda/config.hpp"
#include "sqda/model.hpp"
#include "sqda/report.hpp"

namespace sqda {

/// Monte Carlo sweep over the synthetic protocol. Repetition r of every cell
/// draws from the stream derive_seed(seed, r), so results do not depend on
/// the number of workers. Training failures are counted per cell.
ExperimentReport run_synth(const ExperimentConfig& cfg);

/// Random stratified resplits of a dataset. Reads `cfg.dataset` unless a
/// dataset is given.
ExperimentReport run_real(const ExperimentConfig& cfg);
ExperimentReport run_real(const ExperimentConfig& cfg, const LabeledDataset& data);

struct HistogramResult {
  std::array<std::vector<double>, 2> y;  // 2 * score on fresh draws of each class
  std::array<double, 2> m_bar{};         // deterministic equivalents at the fitted w, eta
  std::array<double, 2> v_bar{};
};

/// Trains one Imp-QDA on the histogram configuration (p, n[0]) and scores
/// fresh draws from each class.
HistogramResult run_histogram(const ExperimentConfig& cfg);
void write_histogram(std::ostream& out, const HistogramResult& h, ReportFormat format);

struct SpikeRow {
  int cls = 0;
  Index n = 0;
  Index p = 0;
  double c = 0.0;
  double sigma2 = 0.0;
  Index rank = 0;
  Index index = 0;  // 0-based position among detected spikes
  double sample_eig = 0.0;
  double lambda = 0.0;
  double alignment = 0.0;
  std::optional<double> b;
};

struct SpectrumReport {
  std::vector<SpikeRow> rows;
  std::vector<std::string> warnings;
};

/// Noise level, spike count and spike estimates per class of a dataset (or
/// of one synthetic draw when no dataset is configured).
SpectrumReport run_estimate(const ExperimentConfig& cfg);
void write_spectrum(std::ostream& out, const SpectrumReport& r, ReportFormat format);

}  // namespace sqda
