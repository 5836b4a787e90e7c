#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqda/model.hpp"

namespace sqda {

/// How to read a delimited numeric file into a two-class dataset.
struct DatasetSchema {
  /// ',' by default; ' ' means any run of whitespace.
  char delimiter = ',';
  /// Column holding the label. Negative values count from the end (-1 = last).
  /// Ignored when `labels_path` is set.
  int label_column = 0;
  /// Extra columns to ignore (e.g. a row identifier). Same indexing as above.
  std::vector<int> skip_columns;
  bool header = false;
  /// Raw label -> {0, 1}. Empty means labels must already be 0 or 1.
  std::map<std::string, int> label_map;
  /// Rows whose label is not in `label_map` are dropped instead of rejected.
  bool drop_unmapped = false;
  /// Labels in a separate file, one per line, aligned with the data rows.
  std::optional<std::string> labels_path;
};

/// Parses "4:0,5:1" into a label map.
std::map<std::string, int> parse_label_map(const std::string& text);

/// Throws DataError naming the file and line on malformed rows, wrong arity
/// or unknown labels.
LabeledDataset ingest_dataset(const std::string& path, const DatasetSchema& schema = {});

/// Training/test split of one repetition.
struct Split {
  MatrixXd train0;
  MatrixXd train1;
  LabeledDataset test;
};

/// n0 = floor(q0 n), n1 = n - n0 with q0 the class-0 share of the dataset;
/// rows drawn at random per class, everything else becomes the test set.
Split stratified_split(const LabeledDataset& data, Index n, std::uint64_t seed);

}  // namespace sqda
