#pragma once

#include <string>

#include "fbstab/config.hpp"
#include "fbstab/report.hpp"

namespace fbstab {

/// Dispatches one subcommand against a parsed config and collects check
/// records and series. Domain errors become failed records, never escapes.
ReportDocument run(const RunConfig& cfg, const std::string& subcommand);

/// Full CLI path: load config, apply overrides, run, emit, print one line per
/// check. Returns the process exit status: 0 when every check passes, 1 on
/// configuration errors, 2 otherwise.
int run_cli(const std::string& config_path, const std::string& subcommand,
            const std::string& out_dir, const CliOverrides& overrides);

}  // namespace fbstab
