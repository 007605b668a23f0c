#include "vexspec/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "vexspec/error.hpp"
#include "vexspec/expression.hpp"
#include "vexspec/report.hpp"

#ifndef VEXSPEC_VERSION
#define VEXSPEC_VERSION "unknown"
#endif

namespace vexspec {

using json = nlohmann::ordered_json;

namespace {

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::norms, "norms"},
    {Command::energies, "energies"},
    {Command::solve_sublinear, "solve-sublinear"},
    {Command::solve_superlinear, "solve-superlinear"},
    {Command::sphere_max, "sphere-max"},
    {Command::sweep, "sweep"},
    {Command::family, "family"},
    {Command::rayleigh, "rayleigh"},
    {Command::lambda_alpha, "lambda-alpha"},
};

json constants(const ProblemData& pd) {
  json j;
  j["C_holder"] = pd.c_holder;
  j["C_embed"] = std::isfinite(pd.c_embed) ? json(pd.c_embed) : json(nullptr);
  j["V_norm"] = pd.v_norm;
  j["regime"] = classify(pd) == Regime::sublinear     ? "sublinear"
                : classify(pd) == Regime::superlinear ? "superlinear"
                                                      : "mixed";
  j["p_range"] = {pd.p.lo(), pd.p.hi()};
  j["q_range"] = {pd.q.lo(), pd.q.hi()};
  j["s_range"] = {pd.s.lo(), pd.s.hi()};
  return j;
}

double require(const std::optional<double>& v, const char* field) {
  if (!v) throw ConfigError(std::string("params.") + field + ": required by this command");
  return *v;
}

GridFunction initial_data(const RunConfig& cfg, const StructuredGrid& g) {
  try {
    return expression_nodes(cfg.params.u, g);
  } catch (const Error& e) {
    throw ConfigError(std::string("params.u: ") + e.what());
  }
}

void add_pair(Report& rep, json& results, const EigenPair& ep, const ProblemData& pd) {
  results["eigenpair"] = to_json(ep);
  rep.ok = rep.ok && ep.converged;
  rep.dumps.emplace_back("u", nodal_dump(ep.u, pd.grid));
}

}  // namespace

Command parse_command(std::string_view name) {
  for (const auto& c : kCommands)
    if (name == c.name) return c.command;
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command c) {
  for (const auto& k : kCommands)
    if (k.command == c) return k.name;
  return "unknown";
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : kCommands) v.emplace_back(c.name);
    return v;
  }();
  return names;
}

Report run(Command command, const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  config.solver.validate();
  Report rep;
  json results;
  const CommandParams& prm = config.params;

  switch (command) {
    case Command::norms: {
      const ProblemData pd = config.build_problem();
      const GridFunction u = initial_data(config, pd.grid);
      const std::vector<double> vol = pd.grid.cell_volumes();
      const std::vector<double> cells = cell_values(u, pd.grid).data;
      const std::vector<double> grad = gradient(u, pd.grid).magnitude();
      results["u_norm_p"] = to_json(luxemburg_norm(cells, pd.p, vol));
      results["u_norm_q"] = to_json(luxemburg_norm(cells, pd.q, vol));
      results["u_norm_embedding_target"] = to_json(luxemburg_norm(cells, pd.embedding_target(), vol));
      results["grad_norm_p"] = to_json(luxemburg_norm(grad, pd.p, vol));
      results["modular_u_p"] = modular(cells, pd.p, vol);
      results["modular_grad_p"] = modular(grad, pd.p, vol);
      results["constants"] = constants(pd);
      break;
    }
    case Command::energies: {
      const ProblemData pd = config.build_problem();
      const GridFunction u = initial_data(config, pd.grid);
      const double lambda = prm.lambda.value_or(0.0);
      results["energies"] = to_json(energies(u, pd, lambda));
      results["residual"] = u.is_zero() ? json(nullptr) : json(residual(u, pd, lambda));
      results["constants"] = constants(pd);
      break;
    }
    case Command::solve_sublinear: {
      const ProblemData pd = config.build_calibrated_problem();
      const EigenPair ep = solve_sublinear(pd, prm.alpha, require(prm.lambda, "lambda"), config.solver);
      add_pair(rep, results, ep, pd);
      results["constants"] = constants(pd);
      break;
    }
    case Command::solve_superlinear: {
      const ProblemData pd = config.build_calibrated_problem();
      const EigenPair ep =
          solve_mountain_pass(pd, prm.alpha, require(prm.lambda, "lambda"), config.solver);
      add_pair(rep, results, ep, pd);
      results["constants"] = constants(pd);
      break;
    }
    case Command::sphere_max: {
      const ProblemData pd = config.build_problem();
      const EigenPair ep = solve_sphere_max(pd, prm.alpha, config.solver);
      add_pair(rep, results, ep, pd);
      results["first_level"] = ep.level;
      results["constants"] = constants(pd);
      break;
    }
    case Command::sweep: {
      if (prm.lambdas.empty()) throw ConfigError("params.lambdas: required by this command");
      const ProblemData pd = config.build_calibrated_problem();
      const SweepReport sw = spectrum_sweep(pd, prm.lambdas, prm.alpha, config.solver);
      json rows = json::array();
      for (std::size_t i = 0; i < sw.rows.size(); ++i) {
        rows.push_back(to_json(sw.rows[i]));
        if (sw.pairs[i].u.size() != 0)
          rep.dumps.emplace_back("row" + std::to_string(i), nodal_dump(sw.pairs[i].u, pd.grid));
      }
      results["rows"] = std::move(rows);
      results["all_converged"] = sw.all_converged();
      results["constants"] = constants(pd);
      rep.ok = sw.all_converged();
      rep.csv = sweep_csv(sw);
      break;
    }
    case Command::family: {
      if (prm.radii.empty()) throw ConfigError("params.radii: required by this command");
      const ProblemData pd = config.build_calibrated_problem();
      const FamilyReport fr = eigenfamily(pd, require(prm.mu, "mu"), prm.radii, config.solver);
      json members = json::array();
      for (std::size_t i = 0; i < fr.members.size(); ++i) {
        members.push_back(to_json(fr.members[i]));
        if (fr.members[i].u.size() != 0)
          rep.dumps.emplace_back("member" + std::to_string(i), nodal_dump(fr.members[i].u, pd.grid));
      }
      results["mu"] = fr.mu;
      results["mechanism"] = std::string(to_string(fr.mechanism));
      results["radii"] = fr.radii;
      results["members"] = std::move(members);
      results["min_gap"] = std::isfinite(fr.min_gap) ? json(fr.min_gap) : json(nullptr);
      results["distinct"] = fr.distinct;
      results["notes"] = fr.notes;
      results["constants"] = constants(pd);
      rep.ok = fr.all_converged() && fr.distinct;
      rep.csv = family_csv(fr, pd);
      break;
    }
    case Command::rayleigh: {
      const ProblemData pd = config.build_problem();
      RayleighOptions opt;
      opt.trials = prm.trials;
      opt.seed = config.solver.seed;
      const RayleighReport rr = rayleigh_extrema(pd, prm.alpha, opt);
      results["rayleigh"] = to_json(rr);
      const double lo = pd.q.lo() / pd.p.hi() * rr.nu_star;
      const double hi = pd.q.hi() / pd.p.lo() * rr.nu_star;
      // Both sides coincide for constant exponents.
      const bool holds = lo * (1 - 1e-12) <= rr.nu_sup && rr.nu_sup <= hi * (1 + 1e-12);
      results["sandwich"] = {{"lower", lo}, {"upper", hi}, {"holds", holds}};
      results["constants"] = constants(pd);
      break;
    }
    case Command::lambda_alpha: {
      const ProblemData pd = config.build_calibrated_problem();
      std::vector<double> alphas = prm.alphas;
      if (alphas.empty()) alphas.push_back(prm.alpha);
      json rows = json::array();
      for (double a : alphas) {
        const LambdaAlpha la = lambda_alpha(pd, a);
        rows.push_back({{"alpha", a}, {"lambda_alpha", la.value}, {"large_radius_branch", la.large_radius_branch}});
      }
      results["lambda_alpha"] = std::move(rows);
      results["constants"] = constants(pd);
      break;
    }
  }

  json prov;
  prov["seed"] = config.solver.seed;
  prov["version"] = VEXSPEC_VERSION;
  if (config.timing)
    prov["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  rep.json["command"] = std::string(to_string(command));
  rep.json["ok"] = rep.ok;
  rep.json["config"] = config.to_json();
  rep.json["results"] = std::move(results);
  rep.json["provenance"] = std::move(prov);
  return rep;
}

std::vector<std::filesystem::path> write_report(const Report& report,
                                                const std::filesystem::path& out) {
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw Error("failed writing " + path.string());
    written.push_back(path);
  };
  write(out, report.json.dump(2) + "\n");
  const std::filesystem::path stem = out.parent_path() / out.stem();
  if (!report.csv.empty()) write(std::filesystem::path(stem.string() + ".csv"), report.csv);
  for (const auto& [suffix, content] : report.dumps)
    write(std::filesystem::path(stem.string() + "." + suffix + ".txt"), content);
  return written;
}

}  // namespace vexspec
