// vexspec <command> --config <path> [--out <path>] [--seed <int>]

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vexspec/error.hpp"
#include "vexspec/run.hpp"

namespace {

enum Exit { kOk = 0, kNotConverged = 1, kBadInput = 2, kFailure = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenpairs of variable-exponent p(x)-Laplacian problems"};
  std::string command;
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool timing = false;

  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(vexspec::command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_path, "Report path (overrides the config's output)");
  app.add_option("--seed", seed, "Seed (overrides solver.seed)");
  app.add_flag("--timing", timing, "Record wall time in the report");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    vexspec::RunConfig cfg = vexspec::RunConfig::load(config_path);
    if (seed) cfg.solver.seed = *seed;
    if (!out_path.empty()) cfg.output = out_path;
    if (timing) cfg.timing = true;

    const vexspec::Report report = vexspec::run(vexspec::parse_command(command), cfg);
    if (cfg.output.empty()) {
      std::cout << report.json.dump(2) << "\n";
    } else {
      for (const auto& p : vexspec::write_report(report, cfg.output))
        std::cerr << "wrote " << p.string() << "\n";
    }
    if (!report.ok) {
      std::cerr << "vexspec: some results did not converge\n";
      return kNotConverged;
    }
    return kOk;
  } catch (const vexspec::ConfigError& e) {
    std::cerr << "vexspec: config error: " << e.what() << "\n";
    return kBadInput;
  } catch (const vexspec::RegimeError& e) {
    std::cerr << "vexspec: regime error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "vexspec: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "vexspec: " << e.what() << "\n";
    return kFailure;
  }
}
