#pragma once

// Command dispatch for the vexspec tool.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vexspec/config.hpp"

namespace vexspec {

enum class Command {
  norms,
  energies,
  solve_sublinear,
  solve_superlinear,
  sphere_max,
  sweep,
  family,
  rayleigh,
  lambda_alpha,
};

/// Throws ConfigError for unknown names.
Command parse_command(std::string_view name);
std::string_view to_string(Command c);
const std::vector<std::string>& command_names();

struct Report {
  nlohmann::ordered_json json;
  /// False when any result carries a nonconvergence flag.
  bool ok = true;
  /// Table for sweep and family.
  std::string csv;
  /// (suffix, content) for every eigenfunction, e.g. ("u", ...), ("row0", ...).
  std::vector<std::pair<std::string, std::string>> dumps;
};

/// Runs one command. Pure: nothing is written.
Report run(Command command, const RunConfig& config);

/// Writes the JSON report to `out`, the CSV next to it (same stem, .csv)
/// and each dump as <stem>.<suffix>.txt. Returns the paths written.
std::vector<std::filesystem::path> write_report(const Report& report,
                                                const std::filesystem::path& out);

}  // namespace vexspec
