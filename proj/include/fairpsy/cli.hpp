#ifndef FAIRPSY_CLI_HPP
#define FAIRPSY_CLI_HPP

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fairpsy {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_data = 3 };

/// 64-bit FNV-1a of the file contents as 16 lowercase hex digits.
std::string file_digest(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  double wall_clock_seconds = 0.0;
};

/// Writes <out_dir>/manifest.json through a temporary file and rename. Inputs
/// are digested as given; outputs are every other regular file under out_dir.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

/// Runs the command line `args` (without the program name). Returns the exit
/// code; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairpsy

#endif  // FAIRPSY_CLI_HPP
