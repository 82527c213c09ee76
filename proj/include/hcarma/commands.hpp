#pragma once

// The three CLI commands. Each returns a process exit code:
// 0 success, 1 invalid scenario or arguments, 2 numerical failure.

#include "hcarma/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace hcarma {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

// Writes `paths.csv` (long format: path_id, t, x_1..x_N) and `manifest.json`
// into out_dir.
int cmd_simulate(const Scenario& scenario, const std::filesystem::path& out_dir,
                 unsigned threads, std::ostream& err);

// Writes `analysis.json` into out_dir.
int cmd_analyze(const Scenario& scenario, const std::filesystem::path& out_dir,
                unsigned threads, std::ostream& err);

// Prints one line per cross-check; exit 0 iff every check passes.
int cmd_validate(const Scenario& scenario, std::ostream& out, std::ostream& err);

struct CommandLine {
  std::string command;  // simulate | analyze | validate
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

// Loads the scenario, applies the seed override and maps exceptions to exit
// codes.
int run_command(const CommandLine& cl, std::ostream& out, std::ostream& err);

// Writes `body` to `path` through a temporary file in the same directory and
// a rename.
void write_atomic(const std::filesystem::path& path, const std::string& body);

// %.17g
std::string format_number(double v);

}  // namespace hcarma
