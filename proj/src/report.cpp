#include "wcs/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace wcs {

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ReportError("csv '" + name + "': row width differs from header");
  rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void render_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += csv_field(row[i]);
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::render() const {
  std::string out;
  render_row(out, header);
  for (const auto& r : rows) render_row(out, r);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  std::replace(s.begin(), s.end(), ',', '.');
  return s;
}

std::string format_number(long long v) { return std::to_string(v); }

nlohmann::json point_json(const CriticalPoint& p) {
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"energy", p.energy},
          {"gradient_norm", p.gradient_norm},
          {"b_value", p.b_value},
          {"b1", p.b1},
          {"b2", p.b2},
          {"mass1", p.mass1},
          {"mass2", p.mass2},
          {"classification", to_string(p.classification)},
          {"orbit_id", p.orbit_id},
          {"u1", vec(p.u.u1.coeffs)},
          {"u2", vec(p.u.u2.coeffs)}};
}

void sort_by_energy(nlohmann::json& records) {
  std::stable_sort(records.begin(), records.end(), [](const nlohmann::json& a, const nlohmann::json& b) {
    return a.at("energy").get<double>() < b.at("energy").get<double>();
  });
}

nlohmann::json make_report(nlohmann::json config, nlohmann::json results, nlohmann::json thresholds,
                           nlohmann::json timing) {
  return {{"schema", kReportSchema},
          {"config", std::move(config)},
          {"results", std::move(results)},
          {"thresholds", std::move(thresholds)},
          {"timing", std::move(timing)}};
}

namespace {

void check_sorted(const nlohmann::json& j, const std::string& path) {
  if (j.is_array()) {
    const bool records = !j.empty() && std::all_of(j.begin(), j.end(), [](const nlohmann::json& e) {
      return e.is_object() && e.contains("energy") && e["energy"].is_number();
    });
    if (records) {
      for (std::size_t i = 1; i < j.size(); ++i) {
        if (j[i]["energy"].get<double>() < j[i - 1]["energy"].get<double>()) {
          throw ReportError("report: records under '" + path + "' are not sorted by energy");
        }
      }
    }
    for (std::size_t i = 0; i < j.size(); ++i) check_sorted(j[i], path + "[" + std::to_string(i) + "]");
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) check_sorted(it.value(), path + "." + it.key());
  }
}

}  // namespace

void validate_report(const nlohmann::json& report) {
  if (!report.is_object()) throw ReportError("report: top level must be an object");
  const std::vector<std::string> keys{"config", "results", "schema", "thresholds", "timing"};
  std::vector<std::string> have;
  for (auto it = report.begin(); it != report.end(); ++it) have.push_back(it.key());
  std::sort(have.begin(), have.end());
  if (have != keys) throw ReportError("report: top-level keys must be schema, config, results, thresholds, timing");
  if (!report["schema"].is_string() || report["schema"].get<std::string>() != kReportSchema) {
    throw ReportError("report: missing or unknown schema tag");
  }
  for (const char* k : {"config", "results", "thresholds", "timing"}) {
    if (!report[k].is_object()) throw ReportError(std::string("report: '") + k + "' must be an object");
  }
  check_sorted(report["results"], "results");
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

}  // namespace wcs
