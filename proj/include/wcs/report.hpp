#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcs/nehari.hpp"

namespace wcs {

inline constexpr const char* kReportSchema = "wcs-report/1";

/// A report does not satisfy the report schema.
class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header row plus data rows; rendered with '.' decimals and LF line endings.
struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string render() const;
};

/// Shortest round-trip decimal form ("%.17g"), locale independent.
std::string format_number(double v);
std::string format_number(long long v);

/// JSON record of a critical point; coefficient vectors included.
nlohmann::json point_json(const CriticalPoint& p);

/// Sorts `records` by ascending "energy" (stable).
void sort_by_energy(nlohmann::json& records);

nlohmann::json make_report(nlohmann::json config, nlohmann::json results, nlohmann::json thresholds,
                           nlohmann::json timing);

/// Checks the top-level keys, the schema tag and that every "records"-style group (any array of
/// objects carrying an "energy" field) is sorted ascending. Throws ReportError.
void validate_report(const nlohmann::json& report);

/// Writes `content` to `path` through a temporary file in the same directory and a rename, so
/// readers never see a partial file.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace wcs
