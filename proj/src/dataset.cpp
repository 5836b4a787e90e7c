#include "sqda/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include "sqda/errors.hpp"

namespace sqda {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  if (delim == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i == line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string where(const std::string& path, long line) {
  return path + ":" + std::to_string(line) + ": ";
}

class LabelMapper {
 public:
  explicit LabelMapper(const DatasetSchema& schema) : schema_(schema) {
    for (const auto& [key, value] : schema.label_map) {
      if (auto v = parse_number(key)) numeric_.emplace_back(*v, value);
    }
  }

  /// nullopt = drop the row.
  std::optional<int> map(std::string_view raw, const std::string& context) const {
    const std::string key(trim(raw));
    if (schema_.label_map.empty()) {
      const auto v = parse_number(key);
      if (v && (*v == 0.0 || *v == 1.0)) return static_cast<int>(*v);
      throw DataError(context + "unknown label '" + key + "' (expected 0 or 1, or set label_map)");
    }
    if (auto it = schema_.label_map.find(key); it != schema_.label_map.end()) return it->second;
    if (const auto v = parse_number(key)) {
      for (const auto& [num, label] : numeric_)
        if (num == *v) return label;
    }
    if (schema_.drop_unmapped) return std::nullopt;
    throw DataError(context + "unknown label '" + key + "'");
  }

 private:
  const DatasetSchema& schema_;
  std::vector<std::pair<double, int>> numeric_;
};

int resolve_column(int col, std::size_t width, const std::string& context) {
  const long w = static_cast<long>(width);
  const long c = col < 0 ? w + col : col;
  if (c < 0 || c >= w)
    throw DataError(context + "column " + std::to_string(col) + " out of range for " +
                    std::to_string(width) + " fields");
  return static_cast<int>(c);
}

std::vector<std::string> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace

std::map<std::string, int> parse_label_map(const std::string& text) {
  std::map<std::string, int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (t.empty()) continue;
    const auto colon = t.rfind(':');
    if (colon == std::string_view::npos)
      throw ConfigError("label map entry '" + std::string(t) + "' is not raw:label");
    const std::string raw(trim(t.substr(0, colon)));
    const auto label = parse_number(t.substr(colon + 1));
    if (raw.empty() || !label || (*label != 0.0 && *label != 1.0))
      throw ConfigError("label map entry '" + std::string(t) + "' must map to 0 or 1");
    out[raw] = static_cast<int>(*label);
  }
  if (out.empty()) throw ConfigError("empty label map");
  return out;
}

LabeledDataset ingest_dataset(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path);

  std::optional<std::vector<std::string>> external;
  if (schema.labels_path) external = read_labels_file(*schema.labels_path);

  const LabelMapper mapper(schema);
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t width = 0;
  std::vector<char> is_feature;
  Index dim = 0;
  Index data_rows = 0;

  std::string line;
  long lineno = 0;
  bool header_pending = schema.header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const std::string ctx = where(path, lineno);
    const auto fields = split_fields(line, schema.delimiter);
    if (width == 0) {
      width = fields.size();
      is_feature.assign(width, 1);
      if (!external) is_feature[resolve_column(schema.label_column, width, ctx)] = 0;
      for (int s : schema.skip_columns) is_feature[resolve_column(s, width, ctx)] = 0;
      dim = std::count(is_feature.begin(), is_feature.end(), 1);
      if (dim == 0) throw DataError(ctx + "no feature columns left");
    } else if (fields.size() != width) {
      throw DataError(ctx + "expected " + std::to_string(width) + " fields, got " +
                      std::to_string(fields.size()));
    }

    std::optional<int> label;
    if (external) {
      if (static_cast<std::size_t>(data_rows) >= external->size())
        throw DataError(ctx + "more data rows than labels in " + *schema.labels_path);
      label = mapper.map((*external)[static_cast<std::size_t>(data_rows)],
                         where(*schema.labels_path, data_rows + 1));
    } else {
      label = mapper.map(fields[static_cast<std::size_t>(
                             resolve_column(schema.label_column, width, ctx))],
                         ctx);
    }
    ++data_rows;
    if (!label) continue;

    for (std::size_t f = 0; f < width; ++f) {
      if (!is_feature[f]) continue;
      const auto v = parse_number(fields[f]);
      if (!v || !std::isfinite(*v))
        throw DataError(ctx + "field " + std::to_string(f + 1) + " ('" + std::string(fields[f]) +
                        "') is not a finite number");
      values.push_back(*v);
    }
    labels.push_back(*label);
  }
  if (external && static_cast<std::size_t>(data_rows) != external->size())
    throw DataError(*schema.labels_path + ": " + std::to_string(external->size()) +
                    " labels for " + std::to_string(data_rows) + " data rows");
  if (labels.empty()) throw DataError(path + ": no data rows");

  LabeledDataset out;
  const auto rows = static_cast<Index>(labels.size());
  out.samples = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, dim);
  out.labels = std::move(labels);
  return out;
}

Split stratified_split(const LabeledDataset& data, Index n, std::uint64_t seed) {
  const Index total = data.size();
  const std::array<Index, 2> have{data.count(0), data.count(1)};
  if (have[0] == 0 || have[1] == 0) throw DataError("dataset needs both labels present");
  if (n <= 0 || n >= total)
    throw InvalidArgument("training size " + std::to_string(n) + " must be in (0, " +
                          std::to_string(total) + ")");
  const double q0 = static_cast<double>(have[0]) / static_cast<double>(total);
  std::array<Index, 2> take;
  take[0] = static_cast<Index>(std::floor(q0 * static_cast<double>(n)));
  take[1] = n - take[0];
  for (int i = 0; i < 2; ++i) {
    if (take[i] > have[i])
      throw InvalidArgument("training size leaves no room in class " + std::to_string(i));
  }

  std::array<std::vector<Index>, 2> idx;
  for (Index r = 0; r < total; ++r) idx[data.labels[static_cast<std::size_t>(r)]].push_back(r);
  Rng rng(seed);
  std::vector<char> used(static_cast<std::size_t>(total), 0);
  Split out;
  for (int i = 0; i < 2; ++i) {
    std::shuffle(idx[i].begin(), idx[i].end(), rng.engine());
    std::vector<Index> chosen(idx[i].begin(), idx[i].begin() + take[i]);
    std::sort(chosen.begin(), chosen.end());
    for (Index r : chosen) used[static_cast<std::size_t>(r)] = 1;
    (i == 0 ? out.train0 : out.train1) = data.samples(chosen, Eigen::all);
  }
  std::vector<Index> rest;
  for (Index r = 0; r < total; ++r)
    if (!used[static_cast<std::size_t>(r)]) rest.push_back(r);
  out.test.samples = data.samples(rest, Eigen::all);
  out.test.labels.reserve(rest.size());
  for (Index r : rest) out.test.labels.push_back(data.labels[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace sqda
