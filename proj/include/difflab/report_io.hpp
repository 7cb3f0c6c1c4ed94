#pragma once

// On-disk formats: CSV tables for densities and curves, one JSON report per
// run. Every file carries the tool version and the fully resolved config.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "difflab/ensembles.hpp"
#include "difflab/stats.hpp"

namespace difflab {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "difflab";
inline constexpr const char* kVersion = DIFFLAB_VERSION;

inline constexpr const char* kDensityHeader = "bin_left,bin_right,count,density";
inline constexpr const char* kCurveHeader = "n,mean,variance,msd";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

struct CsvTable {
  std::string file_name;
  std::string header;
  std::vector<std::string> rows;

  void add_row(const std::vector<std::string>& cells);
};

CsvTable density_table(std::string file_name, const EmpiricalDensity& density);

struct CurvePoint {
  double n = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double msd = 0.0;
};

CsvTable curve_table(std::string file_name, const std::vector<CurvePoint>& points);

/// Writes `# difflab <version>` and `# config <json>` comment lines, then the
/// header and rows, LF-terminated.
std::string render_csv(const CsvTable& table, const ordered_json& config);

struct Report {
  std::string tool = kToolName;
  std::string version = kVersion;
  std::string experiment;
  ordered_json config = ordered_json::object();
  ordered_json results = ordered_json::object();
  std::vector<Verdict> verdicts;

  bool pass() const;

  friend bool operator==(const Report&, const Report&) = default;
};

ordered_json to_json(const Report& report);
/// Throws IoError on a malformed document.
Report report_from_json(const ordered_json& doc);

std::string render_report(const Report& report);
Report parse_report(const std::string& text);

/// Writes report.json and every table into out_dir, creating it if needed.
/// Throws IoError when a file cannot be written.
void emit(const Report& report, const std::vector<CsvTable>& tables,
          const std::filesystem::path& out_dir);

}  // namespace difflab
