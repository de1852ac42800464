#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lef/config.hpp"

namespace lef {

enum ExitStatus : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitNonIntegrable = 3,
  kExitNoConvergence = 4,
  kExitVerification = 5,
};

int exit_status_for(const std::string& category);

bool is_known_command(const std::string& command);

/// Runs one command, writes its artifacts under out_dir and returns the exit
/// status.  Failures leave an error.json with the error category instead.
int run_command(const RunConfig& config, const std::string& command,
                const std::filesystem::path& out_dir, std::uint64_t seed, std::ostream& log);

/// Writes error.json and returns the matching exit status.
int report_error(const std::string& command, const std::string& category,
                 const std::string& message, const std::filesystem::path& out_dir,
                 std::ostream& log);

}  // namespace lef
