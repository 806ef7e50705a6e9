#include "fbstab/report.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fbstab/errors.hpp"

namespace fbstab {

bool ReportDocument::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void ReportDocument::check_bound(const std::string& name, double value,
                                 double tolerance, const std::string& note) {
  checks.push_back({name, value, tolerance,
                    std::isfinite(value) && std::abs(value) <= tolerance, note});
}

void ReportDocument::check_flag(const std::string& name, bool pass, double value,
                                const std::string& note) {
  checks.push_back({name, value, 0.0, pass, note});
}

void ReportDocument::info(const std::string& name, double value,
                          const std::string& note) {
  checks.push_back({name, value, 0.0, true, note});
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void emit(const ReportDocument& report, const std::string& out_dir,
          double wall_seconds) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  nlohmann::json doc;
  doc["tool"] = "fbstab";
  doc["format_version"] = 1;
  doc["command"] = report.command;
  doc["config"] = report.config_echo;
  doc["versions"] = {
      {"fbstab", "1.0.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)}};
  doc["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks)
    doc["checks"].push_back({{"name", c.name},
                             {"value", fmt17(c.value)},
                             {"tolerance", fmt17(c.tolerance)},
                             {"pass", c.pass},
                             {"note", c.note}});
  doc["series"] = nlohmann::json::array();
  for (const auto& s : report.series)
    doc["series"].push_back(
        {{"name", s.name}, {"file", s.name + ".csv"}, {"columns", s.columns}});
  doc["all_pass"] = report.all_pass();

  {
    std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
    if (!out) throw IoError("cannot write report.json in " + out_dir);
    out << doc.dump(2) << "\n";
  }

  for (const auto& s : report.series) {
    std::ofstream out(fs::path(out_dir) / (s.name + ".csv"), std::ios::binary);
    if (!out) throw IoError("cannot write series " + s.name);
    for (size_t c = 0; c < s.columns.size(); ++c)
      out << s.columns[c] << (c + 1 < s.columns.size() ? "," : "\n");
    for (const auto& row : s.rows) {
      for (size_t c = 0; c < row.size(); ++c)
        out << fmt17(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
  }

  if (wall_seconds >= 0.0) {
    std::ofstream out(fs::path(out_dir) / "timing.txt", std::ios::binary);
    out << "wall_seconds=" << fmt17(wall_seconds) << "\n";
  }
}

}  // namespace fbstab
