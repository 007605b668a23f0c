#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vexspec/error.hpp"
#include "vexspec/expression.hpp"
#include "vexspec/functionals.hpp"
#include "vexspec/report.hpp"
#include "vexspec/run.hpp"
#include "vexspec/solvers.hpp"

namespace py = pybind11;
using namespace vexspec;

namespace {

std::vector<double> values(const GridFunction& u) {
  return {u.values().begin(), u.values().end()};
}

py::dict snapshot_dict(const EnergySnapshot& e) {
  py::dict d;
  d["G"] = e.G;
  d["F"] = e.F;
  d["phi"] = e.phi;
  d["psi"] = e.psi;
  d["I_lambda"] = e.I_lambda;
  d["lambda_used"] = e.lambda_used;
  return d;
}

}  // namespace

PYBIND11_MODULE(_vexspec, m) {
  m.doc() = "Variable-exponent p(x)-Laplacian eigenpair solvers";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
  py::register_exception<RegimeError>(m, "RegimeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<StructuredGrid>(m, "StructuredGrid")
      .def_static("interval", &StructuredGrid::interval, py::arg("length"), py::arg("nodes"))
      .def_static("rectangle", &StructuredGrid::rectangle, py::arg("lx"), py::arg("ly"),
                  py::arg("nx"), py::arg("ny"))
      .def_property_readonly("dim", &StructuredGrid::dim)
      .def_property_readonly("node_count", &StructuredGrid::node_count)
      .def_property_readonly("cell_count", &StructuredGrid::cell_count)
      .def_property_readonly("cell_volume", &StructuredGrid::cell_volume)
      .def("extent", &StructuredGrid::extent)
      .def("spacing", &StructuredGrid::spacing)
      .def("node_coords", [](const StructuredGrid& g) {
        std::vector<std::array<double, 2>> out;
        for (std::size_t n = 0; n < g.node_count(); ++n) out.push_back(g.node_coord(n));
        return out;
      })
      .def("cell_centers", [](const StructuredGrid& g) {
        std::vector<std::array<double, 2>> out;
        for (std::size_t c = 0; c < g.cell_count(); ++c) out.push_back(g.cell_center(c));
        return out;
      })
      .def("on_boundary", &StructuredGrid::on_boundary);

  py::class_<NormResult>(m, "NormResult")
      .def_readonly("norm", &NormResult::norm)
      .def_readonly("iterations", &NormResult::iterations)
      .def_readonly("bracket_width", &NormResult::bracket_width);

  m.def("modular", [](const std::vector<double>& u, const std::vector<double>& p,
                      const std::vector<double>& vol) { return modular(u, ExponentField(p), vol); },
        py::arg("u"), py::arg("p"), py::arg("cell_volumes"));
  m.def("luxemburg_norm",
        [](const std::vector<double>& u, const std::vector<double>& p,
           const std::vector<double>& vol, std::optional<double> tol) {
          return tol ? luxemburg_norm(u, ExponentField(p), vol, *tol)
                     : luxemburg_norm(u, ExponentField(p), vol);
        },
        py::arg("u"), py::arg("p"), py::arg("cell_volumes"), py::arg("tol") = py::none());

  py::class_<ProblemData>(m, "ProblemData")
      .def_readonly("grid", &ProblemData::grid)
      .def_readwrite("c_holder", &ProblemData::c_holder)
      .def_readwrite("c_embed", &ProblemData::c_embed)
      .def_readonly("v_norm", &ProblemData::v_norm)
      .def_property_readonly("p", [](const ProblemData& pd) { return pd.p.values(); })
      .def_property_readonly("q", [](const ProblemData& pd) { return pd.q.values(); })
      .def_property_readonly("regime", [](const ProblemData& pd) {
        switch (classify(pd)) {
          case Regime::sublinear: return "sublinear";
          case Regime::superlinear: return "superlinear";
          default: return "mixed";
        }
      });

  m.def("make_problem",
        [](const StructuredGrid& g, const std::vector<double>& p, const std::vector<double>& q,
           const std::vector<double>& s, const std::vector<double>& V) {
          return make_problem(g, ExponentField(p), ExponentField(q), ExponentField(s), V);
        },
        py::arg("grid"), py::arg("p"), py::arg("q"), py::arg("s"), py::arg("V"));
  m.def("expression_eval",
        [](const std::string& expr, const StructuredGrid& g) { return expression_eval(expr, g).data; },
        py::arg("expr"), py::arg("grid"));

  auto as_u = [](const ProblemData& pd, const std::vector<double>& u) {
    return GridFunction(pd.grid, u);
  };
  m.def("energies",
        [as_u](const std::vector<double>& u, const ProblemData& pd, double lambda) {
          return snapshot_dict(energies(as_u(pd, u), pd, lambda));
        },
        py::arg("u"), py::arg("pd"), py::arg("lam") = 0.0);
  m.def("grad_G", [as_u](const std::vector<double>& u, const ProblemData& pd) {
    return values(grad_G(as_u(pd, u), pd));
  });
  m.def("grad_F", [as_u](const std::vector<double>& u, const ProblemData& pd) {
    return values(grad_F(as_u(pd, u), pd));
  });
  m.def("residual",
        [as_u](const std::vector<double>& u, const ProblemData& pd, double lambda) {
          return residual(as_u(pd, u), pd, lambda);
        },
        py::arg("u"), py::arg("pd"), py::arg("lam"));
  m.def("lambda_alpha",
        [](const ProblemData& pd, double alpha) {
          const LambdaAlpha la = lambda_alpha(pd, alpha);
          return py::make_tuple(la.value, la.large_radius_branch);
        },
        py::arg("pd"), py::arg("alpha"));
  m.def("embedding_constant", &embedding_constant, py::arg("pd"), py::arg("trials") = 4,
        py::arg("iters") = 200, py::arg("seed") = 0);
  m.def("calibrate_embedding", &calibrate_embedding, py::arg("pd"), py::arg("trials") = 4,
        py::arg("iters") = 200, py::arg("safety_factor") = 2.0, py::arg("seed") = 0);

  py::class_<RayleighReport>(m, "RayleighReport")
      .def_readonly("nu_star", &RayleighReport::nu_star)
      .def_readonly("nu_sup", &RayleighReport::nu_sup)
      .def_readonly("lambda_star", &RayleighReport::lambda_star)
      .def_readonly("mu_star", &RayleighReport::mu_star)
      .def_readonly("trials", &RayleighReport::trials);
  m.def("rayleigh_extrema",
        [](const ProblemData& pd, double alpha, int trials, std::uint64_t seed) {
          RayleighOptions opt;
          opt.trials = trials;
          opt.seed = seed;
          return rayleigh_extrema(pd, alpha, opt);
        },
        py::arg("pd"), py::arg("alpha"), py::arg("trials") = 4, py::arg("seed") = 0);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("grad_tol", &SolverConfig::grad_tol)
      .def_readwrite("step0", &SolverConfig::step0)
      .def_readwrite("backtrack", &SolverConfig::backtrack)
      .def_readwrite("armijo", &SolverConfig::armijo)
      .def_readwrite("path_nodes", &SolverConfig::path_nodes)
      .def_readwrite("seed", &SolverConfig::seed);

  py::class_<EigenPair>(m, "EigenPair")
      .def_readonly("lam", &EigenPair::lambda)
      .def_property_readonly("u", [](const EigenPair& ep) { return values(ep.u); })
      .def_readonly("residual", &EigenPair::residual)
      .def_property_readonly("energies", [](const EigenPair& ep) { return snapshot_dict(ep.snapshot); })
      .def_property_readonly("mechanism", [](const EigenPair& ep) { return std::string(to_string(ep.mechanism)); })
      .def_readonly("converged", &EigenPair::converged)
      .def_readonly("iterations", &EigenPair::iterations)
      .def_readonly("alpha", &EigenPair::alpha)
      .def_readonly("level", &EigenPair::level)
      .def_readonly("mu", &EigenPair::mu)
      .def_readonly("history", &EigenPair::history)
      .def_readonly("notes", &EigenPair::notes);

  const SolverConfig defaults;
  m.def("solve_sublinear", &solve_sublinear, py::arg("pd"), py::arg("alpha"), py::arg("lam"),
        py::arg("cfg") = defaults);
  m.def("solve_sphere_max", &solve_sphere_max, py::arg("pd"), py::arg("alpha"),
        py::arg("cfg") = defaults);
  m.def("solve_mountain_pass", &solve_mountain_pass, py::arg("pd"), py::arg("alpha"),
        py::arg("lam"), py::arg("cfg") = defaults);

  m.def("spectrum_sweep",
        [](const ProblemData& pd, const std::vector<double>& lambdas, double alpha,
           const SolverConfig& cfg) { return sweep_csv(spectrum_sweep(pd, lambdas, alpha, cfg)); },
        py::arg("pd"), py::arg("lambdas"), py::arg("alpha"), py::arg("cfg") = defaults,
        "Runs the sweep and returns its CSV table.");
  m.def("eigenfamily",
        [](const ProblemData& pd, double mu, const std::vector<double>& radii,
           const SolverConfig& cfg) { return eigenfamily(pd, mu, radii, cfg).members; },
        py::arg("pd"), py::arg("mu"), py::arg("radii"), py::arg("cfg") = defaults);

  m.def("run",
        [](const std::string& command, const std::string& config_json) {
          const RunConfig cfg = RunConfig::from_json(nlohmann::ordered_json::parse(config_json));
          const Report rep = run(parse_command(command), cfg);
          return py::make_tuple(rep.json.dump(), rep.ok, rep.csv);
        },
        py::arg("command"), py::arg("config_json"),
        "Runs a CLI command on a JSON config string; returns (report_json, ok, csv).");
}
