#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ranklab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitPropertyFails = 2;
inline constexpr int kExitUsage = 64;

struct CliOutcome {
  nlohmann::json report;              // null when only help text was requested
  int exitCode = kExitOk;
  std::optional<std::string> jsonPath;
  std::string helpText;
};

/// Parses a command line (without the program name), runs the command and
/// builds its report. Never throws; failures become error reports.
CliOutcome parse_and_run(const std::vector<std::string>& args);

/// Writes the report as canonical JSON to `path`, or stdout when empty.
void emit_report(const nlohmann::json& report, const std::optional<std::string>& path);

/// Entry point shared by the tool binary and the tests.
int run_cli(int argc, const char* const* argv);

}  // namespace ranklab
