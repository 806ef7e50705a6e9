#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fbstab {

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;  // the bound `value` is held against (0 = informational)
  bool pass = true;
  std::string note;
};

struct SeriesTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ReportDocument {
  nlohmann::json config_echo;
  std::string command;
  std::vector<CheckRecord> checks;
  std::vector<SeriesTable> series;

  bool all_pass() const;
  /// Bound-style record: pass iff |value| <= tolerance.
  void check_bound(const std::string& name, double value, double tolerance,
                   const std::string& note = "");
  /// Predicate-style record.
  void check_flag(const std::string& name, bool pass, double value = 0.0,
                  const std::string& note = "");
  /// Informational record (never fails).
  void info(const std::string& name, double value, const std::string& note = "");
};

/// Writes report.json plus one CSV per series (17 significant digits, LF
/// endings). Wall-clock goes to a separate timing.txt so that reports stay
/// byte-identical across reruns.
void emit(const ReportDocument& report, const std::string& out_dir,
          double wall_seconds = -1.0);

}  // namespace fbstab
