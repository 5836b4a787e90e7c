#include "sqda/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sqda/errors.hpp"

namespace sqda {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kColumns[] = {"classifier", "n",         "p",    "extra",   "mean_error",
                                    "std_error",  "reps",      "failures", "seconds"};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string join_extra(const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string out;
  for (const auto& [k, v] : extra) {
    if (!out.empty()) out += ';';
    out += k + '=' + v;
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> split_extra(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DataError("report: malformed extra entry '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("report: '" + s + "' is not a number");
  return v;
}

long parse_long(const std::string& s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("report: '" + s + "' is not an integer");
  return v;
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double from_json_number(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "jsonl" || name == "json-lines" || name == "json") return ReportFormat::jsonl;
  throw ConfigError("unknown report format '" + name + "' (csv or jsonl)");
}

void write_report(std::ostream& out, const ExperimentReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& c : report.cells) {
      out << csv_field(c.classifier) << ',' << c.n << ',' << c.p << ','
          << csv_field(join_extra(c.extra)) << ',' << format_double(c.mean_error) << ','
          << format_double(c.std_error) << ',' << c.reps << ',' << c.failures << ','
          << format_double(c.seconds) << '\n';
    }
    return;
  }
  for (const auto& c : report.cells) {
    Json extra = Json::object();
    for (const auto& [k, v] : c.extra) extra[k] = v;
    Json row;
    row["classifier"] = c.classifier;
    row["n"] = c.n;
    row["p"] = c.p;
    row["extra"] = std::move(extra);
    row["mean_error"] = json_number(c.mean_error);
    row["std_error"] = json_number(c.std_error);
    row["reps"] = c.reps;
    row["failures"] = c.failures;
    row["seconds"] = json_number(c.seconds);
    out << row.dump() << '\n';
  }
}

void emit_report(const ExperimentReport& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write report to " + path);
  write_report(out, report, format);
  out.flush();
  if (!out) throw DataError("error while writing " + path);
}

ExperimentReport read_report(std::istream& in, ReportFormat format) {
  ExperimentReport report;
  std::string line;
  if (format == ReportFormat::csv) {
    if (!std::getline(in, line)) throw DataError("report: missing header");
    const auto header = split_csv_line(line);
    if (header.size() != std::size(kColumns)) throw DataError("report: unexpected header");
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] != kColumns[i]) throw DataError("report: unexpected column '" + header[i] + "'");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != std::size(kColumns)) throw DataError("report: wrong field count");
      ReportCell c;
      c.classifier = f[0];
      c.n = parse_long(f[1]);
      c.p = parse_long(f[2]);
      c.extra = split_extra(f[3]);
      c.mean_error = parse_double(f[4]);
      c.std_error = parse_double(f[5]);
      c.reps = parse_long(f[6]);
      c.failures = parse_long(f[7]);
      c.seconds = parse_double(f[8]);
      report.cells.push_back(std::move(c));
    }
    return report;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json row;
    try {
      row = Json::parse(line);
      ReportCell c;
      c.classifier = row.at("classifier").get<std::string>();
      c.n = row.at("n").get<long>();
      c.p = row.at("p").get<long>();
      for (const auto& [k, v] : row.at("extra").items()) c.extra.emplace_back(k, v.get<std::string>());
      c.mean_error = from_json_number(row.at("mean_error"));
      c.std_error = from_json_number(row.at("std_error"));
      c.reps = row.at("reps").get<long>();
      c.failures = row.at("failures").get<long>();
      c.seconds = from_json_number(row.at("seconds"));
      report.cells.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("report: ") + e.what());
    }
  }
  return report;
}

}  // namespace sqda
