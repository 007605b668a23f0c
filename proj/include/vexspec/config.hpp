#pragma once

// JSON run configuration: the problem instance, solver knobs and the
// per-command parameters.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vexspec/functionals.hpp"
#include "vexspec/solvers.hpp"

namespace vexspec {

struct ProblemSpec {
  std::vector<double> domain{1.0};       ///< [L] or [Lx, Ly]
  std::vector<std::size_t> nodes{129};   ///< [n] or [nx, ny]
  std::string p = "2";
  std::string q = "2";
  std::string s = "4";
  std::string V = "1";
  int embedding_trials = 4;
  int embedding_iters = 200;
  double safety_factor = 2.0;
  /// Fixed constants instead of the computed ones.
  std::optional<double> c_embed;
  std::optional<double> c_holder;
};

struct CommandParams {
  double alpha = 1.0;
  std::optional<double> lambda;
  std::vector<double> lambdas;
  std::vector<double> alphas;
  std::vector<double> radii;
  std::optional<double> mu;
  std::string u = "0";
  int trials = 4;
};

struct RunConfig {
  ProblemSpec problem;
  SolverConfig solver;
  CommandParams params;
  std::string output;
  bool timing = false;

  /// Throws ConfigError naming the offending field.
  static RunConfig from_json(const nlohmann::ordered_json& j);
  /// Reads and parses a file; parse errors carry line and column.
  static RunConfig load(const std::filesystem::path& path);
  /// Every field, defaults included; from_json(to_json()) is the identity.
  nlohmann::ordered_json to_json() const;

  StructuredGrid build_grid() const;
  /// Evaluates the expressions at cell midpoints and checks p, q, s > 1 and
  /// V > 0 cellwise, naming the first offending cell. Constants given in the
  /// config are applied; C_embed is otherwise left uncalibrated.
  ProblemData build_problem() const;
  /// build_problem() with C_embed calibrated unless fixed by the config.
  ProblemData build_calibrated_problem() const;
};

}  // namespace vexspec
