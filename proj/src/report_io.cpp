#include "difflab/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

namespace difflab {

std::string format_double(double x) {
  if (!std::isfinite(x)) {
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  rows.push_back(std::move(row));
}

CsvTable density_table(std::string file_name, const EmpiricalDensity& density) {
  CsvTable t{std::move(file_name), kDensityHeader, {}};
  for (std::size_t i = 0; i < density.bins(); ++i) {
    t.add_row({format_double(density.edges[i]), format_double(density.edges[i + 1]),
               std::to_string(density.counts[i]), format_double(density.density(i))});
  }
  return t;
}

CsvTable curve_table(std::string file_name, const std::vector<CurvePoint>& points) {
  CsvTable t{std::move(file_name), kCurveHeader, {}};
  for (const auto& p : points) {
    t.add_row({format_double(p.n), format_double(p.mean), format_double(p.variance),
               format_double(p.msd)});
  }
  return t;
}

std::string render_csv(const CsvTable& table, const ordered_json& config) {
  std::string out;
  out += "# ";
  out += kToolName;
  out += ' ';
  out += kVersion;
  out += '\n';
  out += "# config ";
  out += config.dump();
  out += '\n';
  out += table.header;
  out += '\n';
  for (const auto& r : table.rows) {
    out += r;
    out += '\n';
  }
  return out;
}

bool Report::pass() const {
  for (const auto& v : verdicts) {
    if (!v.pass()) return false;
  }
  return true;
}

ordered_json to_json(const Report& report) {
  ordered_json doc;
  doc["tool"] = report.tool;
  doc["version"] = report.version;
  doc["experiment"] = report.experiment;
  doc["config"] = report.config;
  doc["results"] = report.results;
  ordered_json verdicts = ordered_json::array();
  for (const auto& v : report.verdicts) {
    ordered_json j;
    j["name"] = v.name;
    j["value"] = v.value;
    j["relation"] = to_string(v.relation);
    j["threshold"] = v.threshold;
    j["pass"] = v.pass();
    verdicts.push_back(std::move(j));
  }
  doc["verdicts"] = std::move(verdicts);
  doc["pass"] = report.pass();
  return doc;
}

Report report_from_json(const ordered_json& doc) {
  try {
    Report r;
    r.tool = doc.at("tool").get<std::string>();
    r.version = doc.at("version").get<std::string>();
    r.experiment = doc.at("experiment").get<std::string>();
    r.config = doc.at("config");
    r.results = doc.at("results");
    for (const auto& j : doc.at("verdicts")) {
      Verdict v;
      v.name = j.at("name").get<std::string>();
      v.value = j.at("value").get<double>();
      const auto rel = relation_from_string(j.at("relation").get<std::string>());
      if (!rel) throw IoError("report: unknown relation");
      v.relation = *rel;
      v.threshold = j.at("threshold").get<double>();
      if (j.at("pass").get<bool>() != v.pass()) {
        throw IoError("report: stored verdict disagrees with its threshold");
      }
      r.verdicts.push_back(std::move(v));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("report: ") + e.what());
  }
}

std::string render_report(const Report& report) {
  return to_json(report).dump(2) + "\n";
}

Report parse_report(const std::string& text) {
  try {
    return report_from_json(ordered_json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("report: ") + e.what());
  }
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void emit(const Report& report, const std::vector<CsvTable>& tables,
          const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + out_dir.string() + ": " +
                  ec.message());
  }
  for (const auto& t : tables) {
    write_file(out_dir / t.file_name, render_csv(t, report.config));
  }
  write_file(out_dir / "report.json", render_report(report));
}

}  // namespace difflab
