#include "sqda/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sqda/errors.hpp"

namespace sqda {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& want) {
  throw ConfigError("invalid value '" + value + "' for " + key + " (expected " + want + ")");
}

template <class T>
T parse_scalar(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const char* begin = v.data();
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.empty() && v.front() == '+') ++begin;
  }
  const auto [ptr, ec] = std::from_chars(begin, v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    bad(key, raw, std::is_floating_point_v<T> ? "a number" : "an integer");
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_scalar<T>(key, item));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = lower(trim(raw));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad(key, raw, "true or false");
}

}  // namespace

Mode parse_mode(const std::string& name) {
  const std::string v = lower(trim(name));
  if (v == "synth" || v == "synthetic") return Mode::synthetic;
  if (v == "real") return Mode::real;
  if (v == "histogram") return Mode::histogram;
  if (v == "estimate") return Mode::estimate;
  throw ConfigError("unknown mode '" + name + "'");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::synthetic: return "synth";
    case Mode::real: return "real";
    case Mode::histogram: return "histogram";
    case Mode::estimate: return "estimate";
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "mode",        "p",         "n",          "a",            "sigma0_sq",     "sigma1_sq",
      "test_size",   "params",    "reps",       "seed",         "imp",           "rqda",
      "oracle",      "variant",   "gammas",     "gamma_select", "folds",         "knn",
      "priors",      "dataset",   "labels",     "delimiter",    "label_column",  "skip_columns",
      "header",      "label_map", "drop_unmapped", "pca_dim",   "pca_fit",       "hist_per_class",
      "out",         "format",    "workers"};
  return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw) {
  const std::string key = lower(trim(raw_key));
  const std::string value = trim(raw);
  const std::string v = lower(value);
  if (key == "mode") cfg.mode = parse_mode(value);
  else if (key == "p") cfg.p = parse_scalar<Index>(key, value);
  else if (key == "n") cfg.n = parse_list<Index>(key, value);
  else if (key == "a") cfg.a = parse_list<double>(key, value);
  else if (key == "sigma0_sq") cfg.sigma0_sq = parse_scalar<double>(key, value);
  else if (key == "sigma1_sq") cfg.sigma1_sq = parse_list<double>(key, value);
  else if (key == "test_size") cfg.test_size = parse_scalar<Index>(key, value);
  else if (key == "params") {
    if (v == "known") cfg.params = ParamMode::known;
    else if (v == "estimated") cfg.params = ParamMode::estimated;
    else bad(key, value, "known or estimated");
  } else if (key == "reps") cfg.reps = parse_scalar<long>(key, value);
  else if (key == "seed") cfg.seed = parse_scalar<std::uint64_t>(key, value);
  else if (key == "imp") cfg.include_imp = parse_bool(key, value);
  else if (key == "rqda") cfg.include_rqda = parse_bool(key, value);
  else if (key == "oracle") cfg.include_oracle = parse_bool(key, value);
  else if (key == "variant") {
    if (v == "general") cfg.variant = Variant::general;
    else if (v == "simplified") cfg.variant = Variant::simplified;
    else bad(key, value, "general or simplified");
  } else if (key == "gammas") {
    cfg.gamma_grid = v == "default" ? default_gamma_grid() : parse_list<double>(key, value);
  } else if (key == "gamma_select") {
    if (v == "oracle" || v == "test-oracle" || v == "test_oracle")
      cfg.gamma_select = GammaSelection::test_oracle;
    else if (v == "kfold" || v == "k-fold" || v == "cv") cfg.gamma_select = GammaSelection::k_fold;
    else bad(key, value, "oracle or kfold");
  } else if (key == "folds") cfg.folds = parse_scalar<int>(key, value);
  else if (key == "knn") cfg.knn = parse_list<Index>(key, value);
  else if (key == "priors") {
    if (v == "training" || v == "train") cfg.priors = PriorMode::training;
    else if (v == "equal") cfg.priors = PriorMode::equal;
    else bad(key, value, "training or equal");
  } else if (key == "dataset") cfg.dataset = value;
  else if (key == "labels") {
    if (value.empty()) cfg.schema.labels_path.reset();
    else cfg.schema.labels_path = value;
  } else if (key == "delimiter") {
    if (v == "whitespace" || v == "space" || v == "tab") cfg.schema.delimiter = ' ';
    else if (v == "comma") cfg.schema.delimiter = ',';
    else if (v == "semicolon") cfg.schema.delimiter = ';';
    else if (raw.size() == 1) cfg.schema.delimiter = raw[0] == '\t' ? ' ' : raw[0];
    else bad(key, value, "comma, semicolon, whitespace or a single character");
  } else if (key == "label_column") cfg.schema.label_column = parse_scalar<int>(key, value);
  else if (key == "skip_columns") cfg.schema.skip_columns = parse_list<int>(key, value);
  else if (key == "header") cfg.schema.header = parse_bool(key, value);
  else if (key == "label_map") {
    if (value.empty()) cfg.schema.label_map.clear();
    else cfg.schema.label_map = parse_label_map(value);
  } else if (key == "drop_unmapped") cfg.schema.drop_unmapped = parse_bool(key, value);
  else if (key == "pca_dim") cfg.pca_dim = parse_scalar<Index>(key, value);
  else if (key == "pca_fit") {
    if (v == "per_rep" || v == "per-rep" || v == "refit") cfg.pca_refit = true;
    else if (v == "once") cfg.pca_refit = false;
    else bad(key, value, "per_rep or once");
  } else if (key == "hist_per_class") cfg.hist_per_class = parse_scalar<Index>(key, value);
  else if (key == "out") cfg.out = value;
  else if (key == "format") cfg.format = parse_report_format(v);
  else if (key == "workers") cfg.workers = parse_scalar<int>(key, value);
  else throw ConfigError("unknown config key '" + raw_key + "'");
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(cfg, t.substr(0, eq), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (reps < 1) fail("reps must be at least 1");
  if (n.empty()) fail("n grid is empty");
  for (Index v : n)
    if (v <= 0) fail("n must be positive");
  if (workers < 0) fail("workers must be non-negative");
  if (gamma_grid.empty()) fail("gamma grid is empty");
  for (double g : gamma_grid)
    if (!(g > 0.0)) fail("gamma values must be positive");
  if (gamma_select == GammaSelection::k_fold && folds < 2) fail("folds must be at least 2");
  for (Index k : knn)
    if (k < 1) fail("knn k must be at least 1");

  if (mode == Mode::synthetic || mode == Mode::histogram ||
      (mode == Mode::estimate && dataset.empty())) {
    if (p < 6) fail("p must be at least 6 (the protocol uses six spike directions)");
    if (a.empty()) fail("a grid is empty");
    if (sigma1_sq.empty()) fail("sigma1_sq grid is empty");
    if (!(sigma0_sq > 0.0)) fail("sigma0_sq must be positive");
    for (double s : sigma1_sq)
      if (!(s > 0.0)) fail("sigma1_sq must be positive");
    for (Index v : n)
      if (v < 4) fail("n must be at least 4 so each class gets two samples");
    if (test_size < 2) fail("test_size must be at least 2");
    if (hist_per_class < 1) fail("hist_per_class must be at least 1");
  }
  if (mode == Mode::synthetic && !include_imp && !include_rqda && !include_oracle && knn.empty())
    fail("no classifier enabled");
  if (mode == Mode::real) {
    if (dataset.empty()) fail("real mode needs a dataset path");
    if (!include_imp && !include_rqda && knn.empty()) fail("no classifier enabled");
  }
  if (pca_dim < 0) fail("pca_dim must be non-negative");
}

}  // namespace sqda
