#include <CLI11.hpp>
#include <string>

#include "fbstab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fbstab: free-boundary stability experiments on the periodic strip"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  fbstab::CliOverrides ov;
  int nx = 0, ny = 0, modes = 0;
  unsigned long long seed = 0;

  const std::vector<std::string> names = {"solve",      "criticality", "secondvar",
                                          "coercivity", "flow",        "verify",
                                          "sweep",      "wave"};
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "path to the JSON config")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--grid-nx", nx, "override scenario.nx");
    sub->add_option("--grid-ny", ny, "override scenario.ny");
    sub->add_option("--modes", modes, "override scenario.modes");
    sub->add_option("--seed", seed, "override command.seed");
  }

  CLI11_PARSE(app, argc, argv);

  if (nx > 0) ov.nx = nx;
  if (ny > 0) ov.ny = ny;
  if (modes > 0) ov.modes = modes;
  if (seed > 0) ov.seed = seed;

  const std::string sub = app.get_subcommands().front()->get_name();
  return fbstab::run_cli(config_path, sub, out_dir, ov);
}
