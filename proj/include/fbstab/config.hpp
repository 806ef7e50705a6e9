#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbstab/scenario.hpp"

namespace fbstab {

/// Per-subcommand parameters of the command block.
struct CommandParams {
  std::vector<double> epsilons{0.2, 0.1, 0.05};
  std::vector<double> s_values{0.25, 0.5, 1.0};
  int s_count = 9;
  double s_max = 1.0;
  int fd_count = 5;
  double fd_max = 0.1;
  int bump_count = 10;
  double bump_norm = 0.05;
  std::uint64_t seed = 1234;
  double wave_q = 4.0;
  double wave_g = 1.0;
};

struct RunConfig {
  nlohmann::json echo;  // normalized document (defaults filled in)
  Scenario scenario;
  CommandParams command;
};

/// Strict parse: unknown keys and out-of-range values raise ConfigInvalid.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);  // IoError on unreadable files

struct CliOverrides {
  std::optional<int> nx, ny, modes;
  std::optional<std::uint64_t> seed;
};

/// Re-applies --grid-nx/--grid-ny/--modes/--seed on top of a parsed config.
RunConfig apply_overrides(const RunConfig& cfg, const CliOverrides& ov);

}  // namespace fbstab
