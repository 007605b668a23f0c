#include "vexspec/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "vexspec/error.hpp"
#include "vexspec/expression.hpp"

namespace vexspec {

using json = nlohmann::ordered_json;

namespace {

std::string number_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + key + ": unknown field");
}

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double real(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(field + ": expected a finite number");
  return d;
}

double positive(const json& v, const std::string& field) {
  const double d = real(v, field);
  if (!(d > 0.0)) throw ConfigError(field + ": must be > 0");
  return d;
}

long long integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field + ": expected an integer");
  return v.get<long long>();
}

std::vector<double> positive_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(positive(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::string expression_field(const json& v, const std::string& field) {
  if (v.is_string()) {
    try {
      Expression::parse(v.get<std::string>());
    } catch (const ParseError& e) {
      throw ConfigError(field + ": " + e.what());
    }
    return v.get<std::string>();
  }
  if (v.is_number()) return number_text(real(v, field));
  throw ConfigError(field + ": expected an expression string or a number");
}

ProblemSpec parse_problem(const json& j) {
  if (!j.is_object()) throw ConfigError("problem: expected an object");
  reject_unknown(j, "problem.", {"domain", "nodes", "p", "q", "s", "V", "embedding", "C_embed", "C_holder"});
  ProblemSpec ps;
  if (auto v = member(j, "domain")) ps.domain = positive_list(*v, "problem.domain");
  if (auto v = member(j, "nodes")) {
    if (!v->is_array()) throw ConfigError("problem.nodes: expected an array of integers");
    ps.nodes.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const long long n = integer((*v)[i], "problem.nodes[" + std::to_string(i) + "]");
      if (n < 3) throw ConfigError("problem.nodes[" + std::to_string(i) + "]: must be >= 3");
      ps.nodes.push_back(static_cast<std::size_t>(n));
    }
  }
  if (ps.domain.empty() || ps.domain.size() > 2 || ps.domain.size() != ps.nodes.size())
    throw ConfigError("problem.domain/problem.nodes: need matching lengths of 1 or 2");
  if (auto v = member(j, "p")) ps.p = expression_field(*v, "problem.p");
  if (auto v = member(j, "q")) ps.q = expression_field(*v, "problem.q");
  if (auto v = member(j, "s")) ps.s = expression_field(*v, "problem.s");
  if (auto v = member(j, "V")) ps.V = expression_field(*v, "problem.V");
  if (auto e = member(j, "embedding")) {
    if (!e->is_object()) throw ConfigError("problem.embedding: expected an object");
    reject_unknown(*e, "problem.embedding.", {"trials", "iters", "safety_factor"});
    if (auto v = member(*e, "trials")) {
      const long long t = integer(*v, "problem.embedding.trials");
      if (t < 1) throw ConfigError("problem.embedding.trials: must be >= 1");
      ps.embedding_trials = static_cast<int>(t);
    }
    if (auto v = member(*e, "iters")) {
      const long long t = integer(*v, "problem.embedding.iters");
      if (t < 1) throw ConfigError("problem.embedding.iters: must be >= 1");
      ps.embedding_iters = static_cast<int>(t);
    }
    if (auto v = member(*e, "safety_factor")) {
      ps.safety_factor = real(*v, "problem.embedding.safety_factor");
      if (!(ps.safety_factor >= 1.0))
        throw ConfigError("problem.embedding.safety_factor: must be >= 1");
    }
  }
  if (auto v = member(j, "C_embed")) ps.c_embed = positive(*v, "problem.C_embed");
  if (auto v = member(j, "C_holder")) ps.c_holder = positive(*v, "problem.C_holder");
  return ps;
}

SolverConfig parse_solver(const json& j) {
  if (!j.is_object()) throw ConfigError("solver: expected an object");
  reject_unknown(j, "solver.", {"max_iters", "grad_tol", "step0", "backtrack", "armijo", "path_nodes", "seed"});
  SolverConfig c;
  if (auto v = member(j, "max_iters")) c.max_iters = static_cast<int>(integer(*v, "solver.max_iters"));
  if (auto v = member(j, "grad_tol")) c.grad_tol = real(*v, "solver.grad_tol");
  if (auto v = member(j, "step0")) c.step0 = real(*v, "solver.step0");
  if (auto v = member(j, "backtrack")) c.backtrack = real(*v, "solver.backtrack");
  if (auto v = member(j, "armijo")) c.armijo = real(*v, "solver.armijo");
  if (auto v = member(j, "path_nodes")) c.path_nodes = static_cast<int>(integer(*v, "solver.path_nodes"));
  if (auto v = member(j, "seed")) {
    if (!v->is_number_unsigned()) throw ConfigError("solver.seed: expected a nonnegative integer");
    c.seed = v->get<std::uint64_t>();
  }
  c.validate();
  return c;
}

CommandParams parse_params(const json& j) {
  if (!j.is_object()) throw ConfigError("params: expected an object");
  reject_unknown(j, "params.", {"alpha", "lambda", "lambdas", "alphas", "radii", "mu", "u", "trials"});
  CommandParams p;
  if (auto v = member(j, "alpha")) p.alpha = positive(*v, "params.alpha");
  if (auto v = member(j, "lambda")) p.lambda = real(*v, "params.lambda");
  if (auto v = member(j, "lambdas")) p.lambdas = positive_list(*v, "params.lambdas");
  if (auto v = member(j, "alphas")) p.alphas = positive_list(*v, "params.alphas");
  if (auto v = member(j, "radii")) p.radii = positive_list(*v, "params.radii");
  if (auto v = member(j, "mu")) p.mu = positive(*v, "params.mu");
  if (auto v = member(j, "u")) p.u = expression_field(*v, "params.u");
  if (auto v = member(j, "trials")) {
    const long long t = integer(*v, "params.trials");
    if (t < 1) throw ConfigError("params.trials: must be >= 1");
    p.trials = static_cast<int>(t);
  }
  return p;
}

std::string describe(const StructuredGrid& g, std::size_t cell) {
  const auto x = g.cell_center(cell);
  std::ostringstream os;
  os.precision(17);
  os << "cell " << cell << " at x=" << x[0];
  if (g.dim() == 2) os << ", y=" << x[1];
  return os.str();
}

std::vector<double> cell_field(const std::string& expr, const StructuredGrid& g, const char* field) {
  try {
    return expression_eval(expr, g).data;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem.") + field + ": " + e.what());
  }
}

ExponentField exponent(const std::string& expr, const StructuredGrid& g, const char* field) {
  std::vector<double> v = cell_field(expr, g, field);
  for (std::size_t c = 0; c < v.size(); ++c)
    if (!(v[c] > 1.0))
      throw ConfigError(std::string("problem.") + field + " must be > 1 on every cell; " +
                        describe(g, c) + " has " + number_text(v[c]));
  return ExponentField(std::move(v));
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, "", {"problem", "solver", "params", "output", "timing"});
  RunConfig rc;
  if (auto v = member(j, "problem")) rc.problem = parse_problem(*v);
  if (auto v = member(j, "solver")) rc.solver = parse_solver(*v);
  if (auto v = member(j, "params")) rc.params = parse_params(*v);
  if (auto v = member(j, "output")) {
    if (!v->is_string()) throw ConfigError("output: expected a string");
    rc.output = v->get<std::string>();
  }
  if (auto v = member(j, "timing")) {
    if (!v->is_boolean()) throw ConfigError("timing: expected true or false");
    rc.timing = v->get<bool>();
  }
  return rc;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json pj;
  pj["domain"] = problem.domain;
  pj["nodes"] = problem.nodes;
  pj["p"] = problem.p;
  pj["q"] = problem.q;
  pj["s"] = problem.s;
  pj["V"] = problem.V;
  pj["embedding"] = {{"trials", problem.embedding_trials},
                     {"iters", problem.embedding_iters},
                     {"safety_factor", problem.safety_factor}};
  if (problem.c_embed) pj["C_embed"] = *problem.c_embed;
  if (problem.c_holder) pj["C_holder"] = *problem.c_holder;

  json sj;
  sj["max_iters"] = solver.max_iters;
  sj["grad_tol"] = solver.grad_tol;
  sj["step0"] = solver.step0;
  sj["backtrack"] = solver.backtrack;
  sj["armijo"] = solver.armijo;
  sj["path_nodes"] = solver.path_nodes;
  sj["seed"] = solver.seed;

  json cj;
  cj["alpha"] = params.alpha;
  if (params.lambda) cj["lambda"] = *params.lambda;
  if (!params.lambdas.empty()) cj["lambdas"] = params.lambdas;
  if (!params.alphas.empty()) cj["alphas"] = params.alphas;
  if (!params.radii.empty()) cj["radii"] = params.radii;
  if (params.mu) cj["mu"] = *params.mu;
  cj["u"] = params.u;
  cj["trials"] = params.trials;

  json j;
  j["problem"] = std::move(pj);
  j["solver"] = std::move(sj);
  j["params"] = std::move(cj);
  if (!output.empty()) j["output"] = output;
  j["timing"] = timing;
  return j;
}

StructuredGrid RunConfig::build_grid() const {
  if (problem.domain.size() == 1) return StructuredGrid::interval(problem.domain[0], problem.nodes[0]);
  return StructuredGrid::rectangle(problem.domain[0], problem.domain[1], problem.nodes[0],
                                   problem.nodes[1]);
}

ProblemData RunConfig::build_problem() const {
  StructuredGrid g = build_grid();
  ExponentField p = exponent(problem.p, g, "p");
  ExponentField q = exponent(problem.q, g, "q");
  ExponentField s = exponent(problem.s, g, "s");
  std::vector<double> V = cell_field(problem.V, g, "V");
  for (std::size_t c = 0; c < V.size(); ++c)
    if (!(V[c] > 0.0))
      throw ConfigError("problem.V must be > 0 on every cell; " + describe(g, c) + " has " +
                        number_text(V[c]));
  ProblemData pd;
  try {
    pd = make_problem(std::move(g), std::move(p), std::move(q), std::move(s), std::move(V));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  if (problem.c_holder) pd.c_holder = *problem.c_holder;
  if (problem.c_embed) pd.c_embed = *problem.c_embed;
  return pd;
}

ProblemData RunConfig::build_calibrated_problem() const {
  ProblemData pd = build_problem();
  if (!problem.c_embed)
    pd = calibrate_embedding(std::move(pd), problem.embedding_trials, problem.embedding_iters,
                             problem.safety_factor, solver.seed);
  return pd;
}

}  // namespace vexspec
