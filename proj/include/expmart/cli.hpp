#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "expmart/config.hpp"

namespace expmart {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitUsage = 1, kExitFail = 2, kExitIndeterminate = 3 };

struct RunConfig {
  std::string command;
  std::string config_path;
  Config config;
  std::uint64_t seed = 1;
  std::size_t n_paths = 10000;
  std::size_t steps = 256;
  std::string out_dir = ".";
  int threads = 1;
  QuadratureOptions quad;
};

/// argv[0] is the program name. Writes CSV files and manifest.json into the
/// output directory only when the command ran to a verdict.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run_command(int argc, const char* const* argv);

}  // namespace expmart
