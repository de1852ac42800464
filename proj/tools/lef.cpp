#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lef/commands.hpp"
#include "lef/config.hpp"
#include "lef/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Solver and verification suite for sublinear Lane-Emden-Fowler systems "
               "on planar exterior domains"};
  std::string config_path;
  std::string command;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--command", command,
                 "check | threshold | solve-radial | solve-annulus | verify | report")
      ->required();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "seed for randomized property checks")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lef::kExitConfig;
  }

  if (!lef::is_known_command(command)) {
    return lef::report_error(command, "ConfigError", "unknown command '" + command + "'",
                             out_dir, std::cout);
  }
  lef::RunConfig config;
  try {
    config = lef::load_config(config_path);
  } catch (const lef::Error& e) {
    return lef::report_error(command, e.category(), e.what(), out_dir, std::cout);
  }
  return lef::run_command(config, command, out_dir, seed, std::cout);
}
