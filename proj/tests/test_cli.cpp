#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vexspec/error.hpp"
#include "vexspec/report.hpp"
#include "vexspec/run.hpp"

using namespace vexspec;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

fs::path config_path(const char* name) { return fs::path(VEXSPEC_CONFIG_DIR) / name; }

RunConfig config_from(const std::string& text) { return RunConfig::from_json(Json::parse(text)); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Scratch {
public:
  Scratch() {
    dir_ = fs::temp_directory_path() /
           ("vexspec_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

private:
  fs::path dir_;
};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + VEXSPEC_CLI + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> split_lines(const std::string& text, const std::string& eol) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = text.find(eol, start)) != std::string::npos; start = pos + eol.size())
    out.push_back(text.substr(start, pos - start));
  if (start < text.size()) out.push_back(text.substr(start));
  return out;
}

}  // namespace

TEST(Commands, NamesRoundTrip) {
  for (const std::string& name : command_names()) EXPECT_EQ(to_string(parse_command(name)), name);
  EXPECT_THROW(parse_command("solve"), ConfigError);
}

TEST(Commands, LambdaAlphaUnitExample) {
  const Report rep = run(Command::lambda_alpha, RunConfig::load(config_path("lambda_alpha_unit.json")));
  ASSERT_TRUE(rep.ok);
  bool found = false;
  for (const auto& row : rep.json["results"]["lambda_alpha"])
    if (row["alpha"].get<double>() == 1.0) {
      EXPECT_NEAR(row["lambda_alpha"].get<double>(), std::pow(3.0, -2.0 / 3.0), 1e-12);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(Commands, SweepCsv) {
  const Report rep = run(Command::sweep, RunConfig::load(config_path("sweep_sublinear.json")));
  ASSERT_TRUE(rep.ok);
  ASSERT_FALSE(rep.csv.empty());
  ASSERT_EQ(rep.csv.substr(rep.csv.size() - 2), "\r\n");
  const auto lines = split_lines(rep.csv, "\r\n");
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "lambda,residual,u_norm,I_value,iterations,mechanism,converged");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> cols;
    std::stringstream ss(lines[i]);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    ASSERT_EQ(cols.size(), 7u);
    EXPECT_LT(std::stod(cols[1]), 1e-5);
    EXPECT_EQ(cols[5], "ball_min");
    EXPECT_EQ(cols[6], "true");
  }
  EXPECT_EQ(rep.dumps.size(), 4u);
}

TEST(Commands, NormsOfZero) {
  const Report rep = run(Command::norms, config_from(R"({"problem": {"nodes": [33], "p": "2 + x"},
                                                       "params": {"u": "0"}})"));
  EXPECT_EQ(rep.json["results"]["u_norm_p"]["norm"].get<double>(), 0.0);
}

TEST(Commands, EveryCommandRuns) {
  const char* configs[][2] = {{"norms", "norms.json"},
                              {"energies", "norms.json"},
                              {"solve-sublinear", "sweep_sublinear.json"},
                              {"solve-superlinear", "sweep_superlinear.json"},
                              {"sphere-max", "sphere_max_linear.json"},
                              {"rayleigh", "rayleigh_2d.json"},
                              {"family", "family_superlinear.json"}};
  for (const auto& [cmd, file] : configs) {
    RunConfig cfg = RunConfig::load(config_path(file));
    if (std::string(cmd).starts_with("solve-")) cfg.params.lambda = 1.0;
    const Report rep = run(parse_command(cmd), cfg);
    EXPECT_TRUE(rep.ok) << cmd;
    EXPECT_EQ(rep.json["command"].get<std::string>(), cmd);
    EXPECT_TRUE(rep.json["results"].is_object()) << cmd;
  }
}

TEST(Report, ReparsedJsonIsBitExact) {
  const Report rep = run(Command::sweep, RunConfig::load(config_path("sweep_superlinear.json")));
  const Json back = Json::parse(rep.json.dump());
  EXPECT_EQ(back, rep.json);
  const auto& rows = rep.json["results"]["rows"];
  for (std::size_t i = 0; i < rows.size(); ++i)
    EXPECT_EQ(back["results"]["rows"][i]["residual"].get<double>(), rows[i]["residual"].get<double>());
}

TEST(Report, ConfigEchoReproducesTheRun) {
  const Report first = run(Command::sphere_max, RunConfig::load(config_path("sphere_max_linear.json")));
  const Report again = run(Command::sphere_max, RunConfig::from_json(first.json["config"]));
  EXPECT_EQ(first.json.dump(), again.json.dump());
  EXPECT_EQ(RunConfig::from_json(first.json["config"]).to_json(), first.json["config"]);
}

TEST(Report, NodalDumpLayout) {
  const StructuredGrid g = StructuredGrid::rectangle(1.0, 2.0, 3, 5);
  const std::string text = nodal_dump(GridFunction::zero(g), g);
  const auto lines = split_lines(text, "\n");
  ASSERT_EQ(lines.size(), 5u + g.node_count());
  EXPECT_EQ(lines[0], "# vexspec nodal values");
  EXPECT_EQ(lines[1], "dim 2");
  EXPECT_EQ(lines[2], "extents 3 5");
  EXPECT_EQ(lines[3], "spacing 0.5 0.5");
}

TEST(Report, NonFiniteValuesBecomeNull) {
  EigenPair ep;
  ep.u = GridFunction::zero(StructuredGrid::interval(1.0, 3));
  EXPECT_TRUE(to_json(ep)["mu"].is_null());
}

TEST(Config, UnknownFieldsAreNamed) {
  try {
    config_from(R"({"solver": {"grad_tol": 1e-8, "tolerance": 3}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("solver.tolerance"), std::string::npos);
  }
  EXPECT_THROW(config_from(R"({"problem": {"nodes": "many"}})"), ConfigError);
  EXPECT_THROW(config_from(R"({"solver": {"backtrack": 2}})"), ConfigError);
}

TEST(Config, InvalidExponentNamesTheCell) {
  const RunConfig cfg = config_from(R"({"problem": {"nodes": [9], "p": "3 - 4*x"}})");
  try {
    cfg.build_problem();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("problem.p"), std::string::npos) << what;
    EXPECT_NE(what.find("0.5625"), std::string::npos) << what;
  }
  EXPECT_THROW(config_from(R"({"problem": {"V": "x - 0.5"}})").build_problem(), ConfigError);
}

TEST(Config, MalformedFileReportsPosition) {
  Scratch dir;
  std::ofstream(dir / "bad.json") << "{\n  \"problem\": {\"p\": 2,,}\n}\n";
  try {
    RunConfig::load(dir / "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Binary, WritesReportCsvAndDumps) {
  Scratch dir;
  const int code = run_cli("sweep --config \"" + config_path("sweep_sublinear.json").string() +
                               "\" --out \"" + (dir / "sweep.json").string() + "\"",
                           dir / "log.txt");
  ASSERT_EQ(code, 0) << slurp(dir / "log.txt");
  EXPECT_TRUE(fs::exists(dir / "sweep.json"));
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "sweep.row3.txt"));
  const Json j = Json::parse(slurp(dir / "sweep.json"));
  EXPECT_EQ(j["provenance"]["seed"].get<std::uint64_t>(), 7u);
}

TEST(Binary, SeedOverrideAndDeterminism) {
  Scratch dir;
  const std::string args = "sphere-max --config \"" + config_path("sphere_max_linear.json").string() +
                           "\" --seed 42 --out \"" + (dir / "r.json").string() + "\"";
  ASSERT_EQ(run_cli(args, dir / "log.txt"), 0);
  const std::string json = slurp(dir / "r.json"), dump = slurp(dir / "r.u.txt");
  ASSERT_EQ(run_cli(args, dir / "log.txt"), 0);
  EXPECT_EQ(slurp(dir / "r.json"), json);
  EXPECT_EQ(slurp(dir / "r.u.txt"), dump);
  EXPECT_EQ(Json::parse(json)["provenance"]["seed"].get<int>(), 42);
}

TEST(Binary, ExitCodes) {
  Scratch dir;
  std::ofstream(dir / "bad.json") << R"({"problem": {"pp": 1}})";
  EXPECT_EQ(run_cli("norms --config \"" + (dir / "bad.json").string() + "\"", dir / "log.txt"), 2);
  EXPECT_NE(slurp(dir / "log.txt").find("problem.pp"), std::string::npos);
  EXPECT_EQ(run_cli("bogus --config \"" + (dir / "bad.json").string() + "\"", dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("norms", dir / "log.txt"), 2);
  // The sublinear solver on a superlinear problem.
  std::ofstream(dir / "sup.json") << R"({"problem": {"p": "2", "q": "4", "s": "5"},
                                          "params": {"lambda": 1}})";
  EXPECT_EQ(run_cli("solve-sublinear --config \"" + (dir / "sup.json").string() + "\"",
                    dir / "log.txt"), 2);
}

TEST(Binary, NonconvergenceExitsOne) {
  Scratch dir;
  std::ofstream(dir / "short.json") << R"({"problem": {"nodes": [65], "p": "2", "q": "2"},
                                            "solver": {"max_iters": 1, "grad_tol": 1e-14}})";
  EXPECT_EQ(run_cli("sphere-max --config \"" + (dir / "short.json").string() + "\"", dir / "out.json"), 1);
}
