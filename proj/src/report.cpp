#include "vexspec/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace vexspec {

using json = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// JSON has no NaN or infinity.
json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* kCsvHeader = "lambda,residual,u_norm,I_value,iterations,mechanism,converged\r\n";

void csv_row(std::string& out, double lambda, double residual, double u_norm, double I,
             int iterations, Mechanism m, bool converged) {
  out += format_real(lambda) + ',' + format_real(residual) + ',' + format_real(u_norm) + ',' +
         format_real(I) + ',' + std::to_string(iterations) + ',' + std::string(to_string(m)) +
         ',' + (converged ? "true" : "false") + "\r\n";
}

}  // namespace

json to_json(const EnergySnapshot& e) {
  json j;
  j["G"] = real(e.G);
  j["F"] = real(e.F);
  j["phi"] = real(e.phi);
  j["psi"] = real(e.psi);
  j["I_lambda"] = real(e.I_lambda);
  j["lambda_used"] = real(e.lambda_used);
  return j;
}

json to_json(const NormResult& n) {
  return json{{"norm", real(n.norm)}, {"iterations", n.iterations}, {"bracket_width", real(n.bracket_width)}};
}

json to_json(const EigenPair& ep) {
  json j;
  j["lambda"] = real(ep.lambda);
  j["mechanism"] = std::string(to_string(ep.mechanism));
  j["converged"] = ep.converged;
  j["residual"] = real(ep.residual);
  j["alpha"] = real(ep.alpha);
  j["level"] = real(ep.level);
  if (std::isfinite(ep.mu)) j["mu"] = ep.mu;
  j["iterations"] = ep.iterations;
  j["energies"] = to_json(ep.snapshot);
  double m = 0.0;
  for (double v : ep.u.values()) m = std::max(m, std::fabs(v));
  j["u_max_abs"] = m;
  if (ep.mountain_pass) {
    const auto& mp = *ep.mountain_pass;
    j["mountain_pass"] = {{"e0_energy", 0.0},
                          {"e1_energy", real(mp.e1_energy)},
                          {"critical_value", real(mp.critical_value)},
                          {"path_nodes", mp.path_nodes},
                          {"relocations", mp.relocations},
                          {"refinements", mp.refinements},
                          {"newton_steps", mp.newton_steps}};
  }
  j["history_length"] = ep.history.size();
  j["notes"] = ep.notes;
  return j;
}

json to_json(const SweepRow& row) {
  json j;
  j["lambda"] = real(row.lambda);
  j["alpha"] = real(row.alpha);
  j["residual"] = real(row.residual);
  j["u_norm"] = real(row.u_norm);
  j["I_value"] = real(row.I_value);
  j["iterations"] = row.iterations;
  j["mechanism"] = std::string(to_string(row.mechanism));
  j["converged"] = row.converged;
  j["notes"] = row.notes;
  return j;
}

json to_json(const RayleighReport& r) {
  json j;
  j["nu_star"] = real(r.nu_star);
  j["nu_sup"] = real(r.nu_sup);
  j["lambda_star"] = real(r.lambda_star);
  j["mu_star"] = real(r.mu_star);
  j["trials"] = r.trials;
  return j;
}

std::string sweep_csv(const SweepReport& rep) {
  std::string out = kCsvHeader;
  for (const SweepRow& r : rep.rows)
    csv_row(out, r.lambda, r.residual, r.u_norm, r.I_value, r.iterations, r.mechanism, r.converged);
  return out;
}

std::string family_csv(const FamilyReport& rep, const ProblemData& pd) {
  std::string out = kCsvHeader;
  const std::vector<double> vol = pd.grid.cell_volumes();
  for (const EigenPair& m : rep.members) {
    const double u_norm = m.u.size() == 0
                              ? std::nan("")
                              : luxemburg_norm(gradient(m.u, pd.grid).magnitude(), pd.p, vol).norm;
    csv_row(out, m.lambda, m.residual, u_norm, m.snapshot.I_lambda, m.iterations, m.mechanism,
            m.converged);
  }
  return out;
}

std::string nodal_dump(const GridFunction& u, const StructuredGrid& g) {
  std::string out = "# vexspec nodal values\n";
  out += "dim " + std::to_string(g.dim()) + "\n";
  out += "extents";
  for (int a = 0; a < g.dim(); ++a) out += " " + std::to_string(g.extent(a));
  out += "\nspacing";
  for (int a = 0; a < g.dim(); ++a) out += " " + format_real(g.spacing(a));
  out += "\norigin";
  for (int a = 0; a < g.dim(); ++a) out += " " + format_real(g.origin(a));
  out += "\n";
  for (double v : u.values()) out += format_real(v) + "\n";
  return out;
}

}  // namespace vexspec
