#include "vexspec/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/SparseLU>

#include "vexspec/detail/assembly.hpp"
#include "vexspec/detail/optimize.hpp"
#include "vexspec/detail/parallel.hpp"
#include "vexspec/error.hpp"

namespace vexspec {

using detail::from_free;
using detail::GridOperators;
using detail::SpMat;
using detail::to_free;
using detail::Vec;

void SolverConfig::validate() const {
  if (max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw ConfigError("solver.grad_tol must be > 0");
  if (!(step0 > 0.0)) throw ConfigError("solver.step0 must be > 0");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("solver.backtrack must be in (0,1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw ConfigError("solver.armijo must be in (0,1)");
  if (path_nodes < 5) throw ConfigError("solver.path_nodes must be >= 5");
}

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::ball_min: return "ball_min";
    case Mechanism::sphere_max: return "sphere_max";
    case Mechanism::mountain_pass: return "mountain_pass";
  }
  return "unknown";
}

SphereProjection project_to_sphere(const GridFunction& u, const ProblemData& pd, double alpha,
                                   double tol) {
  if (!(tol > 0.0)) throw DomainError("project_to_sphere: tol must be positive");
  SphereProjection out;
  out.t = detail::scale_to_level(u, pd, alpha, tol);
  out.u = out.t * u;
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

GridFunction bump(const StructuredGrid& g) {
  std::vector<double> v(g.node_count());
  for (std::size_t n = 0; n < v.size(); ++n) {
    const auto x = g.node_coord(n);
    double b = std::sin(std::numbers::pi * (x[0] - g.origin(0)) / g.length(0));
    if (g.dim() == 2) b *= std::sin(std::numbers::pi * (x[1] - g.origin(1)) / g.length(1));
    v[n] = b;
  }
  return GridFunction::masked(g, std::move(v));
}

double sphere_tol(double alpha) { return alpha * 1e-13; }

Vec free_gradient_I(const GridFunction& u, const ProblemData& pd, double lambda) {
  return to_free(grad_G(u, pd) - lambda * grad_F(u, pd), pd.grid);
}

double energy_I(const GridFunction& u, const ProblemData& pd, double lambda) {
  return energies(u, pd, lambda).I_lambda;
}

SpMat hessian_I(const GridFunction& u, const ProblemData& pd, double lambda,
                const GridOperators& ops) {
  SpMat h = detail::hessian_G(u, pd, ops);
  if (lambda != 0.0) h -= lambda * detail::hessian_F(u, pd, ops);
  return h;
}

void finish(EigenPair& ep, const ProblemData& pd, const SolverConfig& cfg) {
  ep.snapshot = energies(ep.u, pd, ep.lambda);
  ep.residual = ep.u.is_zero() ? std::numeric_limits<double>::infinity()
                               : residual(ep.u, pd, ep.lambda);
  if (ep.residual > cfg.grad_tol) {
    ep.converged = false;
    ep.notes.push_back("residual " + fmt(ep.residual) + " above grad_tol " + fmt(cfg.grad_tol));
  }
}

struct PolishResult {
  GridFunction u;
  int steps = 0;
};

// Damped Newton on I'(u) = 0 with merit ||I'(u)||; finds saddle points too.
PolishResult newton_polish(const ProblemData& pd, double lambda, GridFunction u, double tol,
                           int max_steps, const GridOperators& ops) {
  PolishResult out;
  const StructuredGrid& g = pd.grid;
  for (int s = 0; s < max_steps; ++s) {
    if (u.is_zero() || residual(u, pd, lambda) <= tol) break;
    const Vec r = free_gradient_I(u, pd, lambda);
    SpMat h = hessian_I(u, pd, lambda, ops);
    h.makeCompressed();
    Eigen::SparseLU<SpMat> lu;
    lu.compute(h);
    if (lu.info() != Eigen::Success) break;
    const Vec d = lu.solve(-r);
    if (lu.info() != Eigen::Success || !d.allFinite()) break;
    const Vec x = to_free(u, g);
    const double m0 = r.norm();
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      const GridFunction trial = from_free(g, x + step * d);
      const double m = free_gradient_I(trial, pd, lambda).norm();
      if (std::isfinite(m) && m < (1.0 - 1e-4 * step) * m0) {
        u = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    ++out.steps;
  }
  out.u = std::move(u);
  return out;
}

// Newton on (u, lambda) for G'(u) = lambda F'(u), G(u) = alpha; each step is
// reprojected onto the sphere and lambda reset to the quotient <G'u,u>/<F'u,u>.
PolishResult bordered_polish(const ProblemData& pd, double alpha, GridFunction u, double tol,
                             int max_steps, const GridOperators& ops) {
  PolishResult out;
  const StructuredGrid& g = pd.grid;
  auto quotient = [&pd](const GridFunction& w) {
    return dot(grad_G(w, pd), w) / dot(grad_F(w, pd), w);
  };
  double lambda = quotient(u);
  double res = residual(u, pd, lambda);
  for (int s = 0; s < max_steps && res > tol; ++s) {
    const Vec gg = to_free(grad_G(u, pd), g);
    const Vec gf = to_free(grad_F(u, pd), g);
    const Eigen::Index n = gg.size();
    const SpMat h = hessian_I(u, pd, lambda, ops);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(h.nonZeros() + 2 * n));
    for (int k = 0; k < h.outerSize(); ++k)
      for (SpMat::InnerIterator it(h, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < n; ++i) {
      trip.emplace_back(i, n, -gf[i]);
      trip.emplace_back(n, i, gg[i]);
    }
    SpMat j(n + 1, n + 1);
    j.setFromTriplets(trip.begin(), trip.end());
    j.makeCompressed();
    Vec rhs(n + 1);
    rhs.head(n) = -(gg - lambda * gf);
    rhs[n] = -(energies(u, pd, 0.0).G - alpha);
    Eigen::SparseLU<SpMat> lu;
    lu.compute(j);
    if (lu.info() != Eigen::Success) break;
    const Vec d = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !d.allFinite()) break;
    const Vec x = to_free(u, g);
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, step *= 0.5) {
      GridFunction trial = from_free(g, x + step * d.head(n));
      if (trial.is_zero()) continue;
      trial = project_to_sphere(trial, pd, alpha, sphere_tol(alpha)).u;
      const double l = quotient(trial);
      const double r = residual(trial, pd, l);
      if (std::isfinite(r) && r < res) {
        u = std::move(trial);
        lambda = l;
        res = r;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++out.steps;
  }
  out.u = std::move(u);
  return out;
}

void warn_outside_window(EigenPair& ep, const ProblemData& pd, double alpha, double lambda) {
  if (!std::isfinite(pd.c_embed)) {
    ep.notes.push_back("C_embed not calibrated; lambda_alpha window not checked");
    return;
  }
  const double la = lambda_alpha(pd, alpha).value;
  if (lambda >= la)
    ep.notes.push_back("lambda " + fmt(lambda) + " >= lambda_alpha " + fmt(la) +
                       "; outside the guaranteed window");
}

}  // namespace

EigenPair solve_sublinear(const ProblemData& pd, double alpha, double lambda,
                          const SolverConfig& cfg) {
  cfg.validate();
  if (!(alpha > 0.0)) throw DomainError("solve_sublinear: alpha must be positive");
  if (!(lambda > 0.0)) throw DomainError("solve_sublinear: lambda must be positive");
  if (!is_sublinear(pd)) throw RegimeError("solve_sublinear needs q^- < p^-");

  EigenPair ep;
  ep.lambda = lambda;
  ep.alpha = alpha;
  ep.mechanism = Mechanism::ball_min;
  warn_outside_window(ep, pd, alpha, lambda);

  const StructuredGrid& g = pd.grid;
  const GridOperators ops(g);
  const detail::Preconditioner precond(ops.stiffness);

  const GridFunction v0 = project_to_sphere(bump(g), pd, alpha, sphere_tol(alpha)).u;
  GridFunction u;
  double t = 0.5;
  for (int k = 0; k < 200; ++k, t *= 0.5) {
    if (energy_I(t * v0, pd, lambda) < 0.0) {
      u = t * v0;
      break;
    }
  }
  if (u.size() == 0) throw RegimeError("solve_sublinear: no seed with I_lambda < 0 found");

  double value = energy_I(u, pd, lambda);
  ep.history.push_back(value);
  double grad_step = cfg.step0;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (residual(u, pd, lambda) <= cfg.grad_tol) {
      ep.converged = true;
      break;
    }
    const Vec gI = free_gradient_I(u, pd, lambda);
    const Vec x = to_free(u, g);

    Vec newton_dir;
    {
      Eigen::SimplicialLDLT<SpMat> ldlt(hessian_I(u, pd, lambda, ops));
      if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
        newton_dir = -ldlt.solve(gI);
        if (!newton_dir.allFinite() || !(gI.dot(newton_dir) < 0.0)) newton_dir.resize(0);
      }
    }

    const double slack = detail::kRoundingSlack * (std::fabs(value) + 1e-300);
    auto attempt = [&](const Vec& d, double step, double* used) -> bool {
      const double slope = gI.dot(d);
      for (int k = 0; k < 60; ++k) {
        GridFunction trial = from_free(g, x + step * d);
        if (!trial.is_zero()) {
          if (energies(trial, pd, 0.0).G > alpha)
            trial = project_to_sphere(trial, pd, alpha, sphere_tol(alpha)).u;
          const double v = energy_I(trial, pd, lambda);
          if (std::isfinite(v) && v <= value + cfg.armijo * step * slope + slack) {
            u = std::move(trial);
            value = v;
            *used = step;
            return true;
          }
        }
        step *= cfg.backtrack;
      }
      return false;
    };

    double used = 0.0;
    bool accepted = newton_dir.size() > 0 && attempt(newton_dir, 1.0, &used);
    if (!accepted) {
      accepted = attempt(-precond.solve(gI), grad_step, &used);
      if (accepted) grad_step = used / cfg.backtrack;
    }
    if (!accepted) {
      ep.notes.push_back("line search stalled");
      break;
    }
    ep.history.push_back(value);
  }
  ep.iterations = it;
  ep.u = u;
  ep.level = value;
  finish(ep, pd, cfg);
  if (ep.snapshot.G > alpha * (1.0 + 1e-12)) {
    ep.converged = false;
    ep.notes.push_back("G(u) exceeds alpha");
  }
  if (ep.converged && !(ep.snapshot.I_lambda < 0.0)) {
    ep.converged = false;
    ep.notes.push_back("I_lambda(u) is not negative");
  }
  return ep;
}

EigenPair solve_sphere_max(const ProblemData& pd, double alpha, const SolverConfig& cfg) {
  cfg.validate();
  if (!(alpha > 0.0)) throw DomainError("solve_sphere_max: alpha must be positive");
  EigenPair ep;
  ep.alpha = alpha;
  ep.mechanism = Mechanism::sphere_max;
  if (!(pd.q.hi() < pd.p.lo()))
    ep.notes.push_back("q^+ >= p^-: the sphere maximum is still a critical point, "
                       "but outside the sublinear setting");

  const StructuredGrid& g = pd.grid;
  const GridOperators ops(g);
  const detail::Preconditioner precond(ops.stiffness);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto multiplier = [&pd](const GridFunction& u) {
    return dot(grad_G(u, pd), u) / dot(grad_F(u, pd), u);
  };

  detail::SmoothObjective neg_f{
      [&pd](const GridFunction& u) { return -energies(u, pd, 0.0).F; },
      [&pd](const GridFunction& u) { return -grad_F(u, pd); }};
  detail::SphereDescentOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.tol = 0.0;
  opt.armijo = cfg.armijo;
  opt.backtrack = cfg.backtrack;
  opt.step0 = cfg.step0;
  opt.done = [&](const GridFunction& u) {
    return residual(u, pd, multiplier(u)) <= cfg.grad_tol;
  };

  GridFunction start;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> v(g.node_count());
    for (double& x : v) x = normal(rng);
    GridFunction cand = GridFunction::masked(g, std::move(v));
    if (cand.is_zero()) continue;
    cand = project_to_sphere(cand, pd, alpha, sphere_tol(alpha)).u;
    const Vec gf = to_free(grad_F(cand, pd), g);
    const Vec gg = to_free(grad_G(cand, pd), g);
    const Vec tangent = gf - (gf.dot(gg) / gg.squaredNorm()) * gg;
    if (tangent.norm() > 0.0 || opt.done(cand)) {
      start = cand;
      break;
    }
    ep.notes.push_back("reseeded: tangential gradient vanished at start");
  }
  if (start.size() == 0) throw DomainError("solve_sphere_max: could not seed");

  const auto res = detail::sphere_descent(pd, alpha, start, neg_f, precond, opt);
  ep.u = res.u;
  ep.iterations = res.iterations;
  for (double v : res.history) ep.history.push_back(-v);
  if (!opt.done(ep.u)) {
    // Ascent gains fall below rounding near the top; finish with Newton.
    PolishResult pol = bordered_polish(pd, alpha, ep.u, cfg.grad_tol, 50, ops);
    if (pol.steps > 0) {
      ep.u = std::move(pol.u);
      ep.iterations += pol.steps;
      ep.history.push_back(energies(ep.u, pd, 0.0).F);
      ep.notes.push_back("finished with " + std::to_string(pol.steps) + " bordered Newton step(s)");
    }
  }
  ep.lambda = multiplier(ep.u);
  ep.mu = 1.0 / ep.lambda;
  ep.converged = true;
  finish(ep, pd, cfg);
  ep.level = ep.snapshot.F;
  return ep;
}

namespace {

// Re-places the interior path nodes at equal Euclidean arclength.
void respace(std::vector<Vec>& path) {
  const std::size_t n = path.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) s[k] = s[k - 1] + (path[k] - path[k - 1]).norm();
  if (!(s.back() > 0.0)) return;
  std::vector<Vec> out(n);
  out.front() = path.front();
  out.back() = path.back();
  std::size_t seg = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = s.back() * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < n && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double w = len > 0.0 ? (target - s[seg]) / len : 0.0;
    out[k] = (1.0 - w) * path[seg] + w * path[seg + 1];
  }
  path = std::move(out);
}

std::vector<Vec> refine(const std::vector<Vec>& path) {
  std::vector<Vec> out;
  out.reserve(2 * path.size() - 1);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    out.push_back(path[k]);
    out.push_back(0.5 * (path[k] + path[k + 1]));
  }
  out.push_back(path.back());
  return out;
}

}  // namespace

EigenPair solve_mountain_pass(const ProblemData& pd, double alpha, double lambda,
                              const SolverConfig& cfg) {
  cfg.validate();
  if (!(alpha > 0.0)) throw DomainError("solve_mountain_pass: alpha must be positive");
  if (!(lambda > 0.0)) throw DomainError("solve_mountain_pass: lambda must be positive");
  if (!(pd.q.lo() >= pd.p.hi() && pd.q.hi() > pd.p.lo()))
    throw RegimeError("solve_mountain_pass needs q^- >= p^+ and q^+ > p^-");

  EigenPair ep;
  ep.lambda = lambda;
  ep.alpha = alpha;
  ep.mechanism = Mechanism::mountain_pass;
  MountainPassInfo info;

  const StructuredGrid& g = pd.grid;
  const GridOperators ops(g);
  const detail::Preconditioner precond(ops.stiffness);

  const GridFunction v0 = project_to_sphere(bump(g), pd, alpha, sphere_tol(alpha)).u;
  GridFunction e1;
  double t = 1.0;
  for (int k = 0; k < 200; ++k, t *= 2.0) {
    if (energy_I(t * v0, pd, lambda) < 0.0) {
      e1 = t * v0;
      break;
    }
  }
  if (e1.size() == 0) throw RegimeError("solve_mountain_pass: no endpoint with I_lambda < 0");
  info.e1_energy = energy_I(e1, pd, lambda);

  const Vec x1 = to_free(e1, g);
  std::vector<Vec> path(static_cast<std::size_t>(cfg.path_nodes));
  for (std::size_t k = 0; k < path.size(); ++k)
    path[k] = (static_cast<double>(k) / static_cast<double>(path.size() - 1)) * x1;
  std::vector<double> level(path.size());
  auto evaluate_path = [&] {
    level.resize(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) level[k] = energy_I(from_free(g, path[k]), pd, lambda);
  };
  evaluate_path();

  const std::size_t max_nodes = 4 * path.size();
  constexpr int kStagnation = 50;
  double lowest_max = std::numeric_limits<double>::infinity();
  int last_progress = 0;
  // Switch to Newton once the path maximum is this close to critical.
  constexpr double kPolishResidual = 1e-2;
  double step = cfg.step0;
  std::size_t top = 1;
  bool collapsed = false;
  int relocations = 0;
  for (; relocations < cfg.max_iters; ++relocations) {
    top = 1;
    for (std::size_t k = 2; k + 1 < path.size(); ++k)
      if (level[k] > level[top]) top = k;
    if (!(level[top] > std::max(level.front(), level.back()))) {
      if (info.refinements == 3) {
        collapsed = true;
        break;
      }
      ++info.refinements;
      path = refine(path);
      evaluate_path();
      ep.notes.push_back("path collapsed; refined to " + std::to_string(path.size()) + " nodes");
      continue;
    }
    // Sample the adjacent segments; a higher midpoint becomes a node.
    if (path.size() < max_nodes) {
      std::size_t insert_at = 0;
      double mid_level = level[top];
      for (std::size_t nb : {top - 1, top + 1}) {
        const Vec mid = 0.5 * (path[top] + path[nb]);
        const double v = energy_I(from_free(g, mid), pd, lambda);
        if (v > mid_level) {
          mid_level = v;
          insert_at = std::max(top, nb);
        }
      }
      if (insert_at != 0) {
        const Vec mid = 0.5 * (path[insert_at - 1] + path[insert_at]);
        path.insert(path.begin() + static_cast<std::ptrdiff_t>(insert_at), mid);
        level.insert(level.begin() + static_cast<std::ptrdiff_t>(insert_at), mid_level);
        continue;
      }
    }
    const GridFunction u = from_free(g, path[top]);
    ep.history.push_back(level[top]);
    if (residual(u, pd, lambda) <= std::max(kPolishResidual, cfg.grad_tol)) break;
    if (level[top] < lowest_max * (1.0 - 1e-9)) {
      lowest_max = level[top];
      last_progress = relocations;
    } else if (relocations - last_progress >= kStagnation) {
      ep.notes.push_back("path maximum stagnated; handing over to Newton");
      break;
    }

    const Vec gI = free_gradient_I(u, pd, lambda);
    const Vec d = -precond.solve(gI);
    const double slope = gI.dot(d);
    // A node may not jump past its neighbours, or segments could tunnel through the ridge.
    const double reach = 0.5 * std::min((path[top] - path[top - 1]).norm(),
                                        (path[top + 1] - path[top]).norm());
    const double cap = reach / d.norm();
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      if (step > cap) step = cap;
      const Vec trial = path[top] + step * d;
      const double v = energy_I(from_free(g, trial), pd, lambda);
      if (std::isfinite(v) && v <= level[top] + cfg.armijo * step * slope) {
        path[top] = trial;
        level[top] = v;
        moved = true;
        break;
      }
      step *= cfg.backtrack;
    }
    if (!moved) break;
    step /= cfg.backtrack;
    if ((relocations + 1) % 10 == 0) {
      respace(path);
      evaluate_path();
    }
  }
  info.relocations = relocations;
  info.path_nodes = static_cast<int>(path.size());

  // Maximize along the two segments adjacent to the top node.
  top = 1;
  for (std::size_t k = 2; k + 1 < path.size(); ++k)
    if (level[k] > level[top]) top = k;
  auto along = [&](double s) {  // s in [-1, 1]
    const Vec& nb = s < 0.0 ? path[top - 1] : path[top + 1];
    return Vec(path[top] + std::fabs(s) * (nb - path[top]));
  };
  {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -1.0, b = 1.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = energy_I(from_free(g, along(c)), pd, lambda);
    double fd = energy_I(from_free(g, along(d)), pd, lambda);
    for (int k = 0; k < 40; ++k) {
      if (fc > fd) {
        b = d; d = c; fd = fc;
        c = b - phi * (b - a);
        fc = energy_I(from_free(g, along(c)), pd, lambda);
      } else {
        a = c; c = d; fc = fd;
        d = a + phi * (b - a);
        fd = energy_I(from_free(g, along(d)), pd, lambda);
      }
    }
    const double s = 0.5 * (a + b);
    const Vec best = along(s);
    if (energy_I(from_free(g, best), pd, lambda) > level[top]) path[top] = best;
  }

  const int polish_budget = std::max(50, cfg.max_iters / 10);
  PolishResult pol = newton_polish(pd, lambda, from_free(g, path[top]), cfg.grad_tol,
                                   polish_budget, ops);
  info.newton_steps = pol.steps;
  ep.u = std::move(pol.u);
  ep.iterations = relocations + pol.steps;
  ep.converged = !collapsed;
  if (collapsed) ep.notes.push_back("path collapsed after 3 refinements");
  finish(ep, pd, cfg);
  ep.level = ep.snapshot.I_lambda;
  info.critical_value = ep.level;
  if (ep.u.is_zero() || !(ep.level > 0.0)) {
    ep.converged = false;
    ep.notes.push_back("critical point is not above the mountain-pass ring (I_lambda <= 0)");
  }
  ep.mountain_pass = info;
  return ep;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("VEXSPEC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

double gradient_norm(const GridFunction& u, const ProblemData& pd) {
  return luxemburg_norm(gradient(u, pd.grid).magnitude(), pd.p, pd.grid.cell_volumes()).norm;
}

}  // namespace

bool SweepReport::all_converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
}

SweepReport spectrum_sweep(const ProblemData& pd_in, const std::vector<double>& lambdas,
                           double alpha, const SolverConfig& cfg) {
  cfg.validate();
  if (lambdas.empty()) throw DomainError("spectrum_sweep: lambdas must be nonempty");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("spectrum_sweep: lambdas must be > 0");
  if (!(alpha > 0.0)) throw DomainError("spectrum_sweep: alpha must be positive");

  const bool sub = is_sublinear(pd_in);
  const bool super = !sub && pd_in.q.lo() >= pd_in.p.hi() && pd_in.q.hi() > pd_in.p.lo();
  ProblemData pd = pd_in;
  std::vector<std::string> shared_notes;
  if ((sub || super) && !std::isfinite(pd.c_embed)) {
    pd = calibrate_embedding(pd);
    shared_notes.push_back("C_embed calibrated to " + fmt(pd.c_embed));
  }

  SweepReport rep;
  rep.rows.resize(lambdas.size());
  rep.pairs.resize(lambdas.size());
  detail::parallel_for(lambdas.size(), [&](std::size_t i) {
    const double lambda = lambdas[i];
    SweepRow& row = rep.rows[i];
    row.lambda = lambda;
    row.notes = shared_notes;
    SolverConfig rc = cfg;
    rc.seed = cfg.seed + i;
    if (!sub && !super) {
      row.alpha = alpha;
      row.converged = false;
      row.notes.push_back("mixed exponent regime: neither solver applies");
      return;
    }
    double a = alpha;
    for (int k = 0; k < 400 && lambda >= lambda_alpha(pd, a).value; ++k) a = sub ? a * 2.0 : a * 0.5;
    row.alpha = a;
    try {
      EigenPair ep = sub ? solve_sublinear(pd, a, lambda, rc) : solve_mountain_pass(pd, a, lambda, rc);
      row.residual = ep.residual;
      row.u_norm = gradient_norm(ep.u, pd);
      row.I_value = ep.snapshot.I_lambda;
      row.iterations = ep.iterations;
      row.mechanism = ep.mechanism;
      row.converged = ep.converged;
      row.notes.insert(row.notes.end(), ep.notes.begin(), ep.notes.end());
      rep.pairs[i] = std::move(ep);
    } catch (const Error& e) {
      row.mechanism = sub ? Mechanism::ball_min : Mechanism::mountain_pass;
      row.converged = false;
      row.residual = std::numeric_limits<double>::quiet_NaN();
      row.notes.push_back(e.what());
    }
  });
  return rep;
}

bool FamilyReport::all_converged() const {
  return std::all_of(members.begin(), members.end(),
                     [](const EigenPair& m) { return m.converged; });
}

namespace {

ProblemData slice_problem(const ProblemData& pd, std::size_t first, std::size_t last) {
  const StructuredGrid& g = pd.grid;
  StructuredGrid sub = g.slice_axis0(first, last);
  const std::size_t rows = g.dim() == 2 ? g.extent(1) - 1 : 1;
  std::vector<double> p, q, s, V;
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t i = first; i < last; ++i) {
      const std::size_t c = g.cell_index(i, j);
      p.push_back(pd.p[c]);
      q.push_back(pd.q[c]);
      s.push_back(pd.s[c]);
      V.push_back(pd.V[c]);
    }
  ProblemData out = make_problem(std::move(sub), ExponentField(std::move(p)),
                                 ExponentField(std::move(q)), ExponentField(std::move(s)),
                                 std::move(V));
  out.c_embed = pd.c_embed;
  return out;
}

}  // namespace

FamilyReport eigenfamily(const ProblemData& pd, double mu, const std::vector<double>& radii_in,
                         const SolverConfig& cfg) {
  cfg.validate();
  constexpr double kBoundaryTol = 1e-12;
  const double pm = pd.p.lo(), pp = pd.p.hi(), qm = pd.q.lo(), qp = pd.q.hi();
  FamilyReport rep;
  if (std::fabs(qp - pm) <= kBoundaryTol && qm < pm)
    rep.mechanism = Mechanism::ball_min;
  else if (std::fabs(qm - pp) <= kBoundaryTol && qp > pm)
    rep.mechanism = Mechanism::mountain_pass;
  else
    throw DomainError("eigenfamily needs q^+ = p^- with q^- < p^-, or q^- = p^+ with q^+ > p^-");
  if (!(mu > 0.0)) throw DomainError("eigenfamily: mu must be positive");
  if (radii_in.empty()) throw DomainError("eigenfamily: radii must be nonempty");
  for (double r : radii_in)
    if (!(r > 0.0)) throw DomainError("eigenfamily: radii must be positive");

  rep.mu = mu;
  rep.radii = radii_in;
  std::sort(rep.radii.begin(), rep.radii.end());
  if (std::isfinite(pd.c_embed)) {
    const double la = lambda_alpha(pd, rep.radii.front()).value;
    if (mu >= la)
      rep.notes.push_back("mu " + fmt(mu) + " >= lambda_alpha " + fmt(la) +
                          "; outside the alpha-independent window");
  }

  const StructuredGrid& g = pd.grid;
  const std::size_t cells0 = g.extent(0) - 1;
  const int polish_budget = std::max(50, cfg.max_iters / 10);
  rep.members.resize(rep.radii.size());
  detail::parallel_for(rep.radii.size(), [&](std::size_t idx) {
    const std::size_t lobes = idx + 1;
    const double alpha = rep.radii[idx];
    SolverConfig rc = cfg;
    rc.seed = cfg.seed + idx;
    auto solve = [&](const ProblemData& sp, double a) {
      return rep.mechanism == Mechanism::ball_min ? solve_sublinear(sp, a, mu, rc)
                                                  : solve_mountain_pass(sp, a, mu, rc);
    };
    // Solves each lobe on its own slice and glues them with alternating signs.
    auto glue = [&](const ProblemData& base, std::vector<std::string>* notes) {
      std::vector<double> glued(g.node_count(), 0.0);
      for (std::size_t j = 0; j < lobes; ++j) {
        const auto cut = [&](std::size_t k) {
          return static_cast<std::size_t>(
              std::lround(static_cast<double>(k * cells0) / static_cast<double>(lobes)));
        };
        const std::size_t a = cut(j), b = cut(j + 1);
        const ProblemData sp = slice_problem(base, a, b);
        const EigenPair piece = solve(sp, alpha / static_cast<double>(lobes));
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        const std::size_t rows = g.dim() == 2 ? g.extent(1) : 1;
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = 0; i <= b - a; ++i)
            glued[g.node_index(a + i, r)] += sign * piece.u[sp.grid.node_index(i, r)];
        if (notes)
          for (const auto& n : piece.notes) notes->push_back("lobe " + std::to_string(j) + ": " + n);
      }
      return GridFunction::masked(g, std::move(glued));
    };

    EigenPair ep;
    try {
      if (lobes == 1) {
        ep = solve(pd, alpha);
      } else {
        if (cells0 / lobes < 2)
          throw DomainError("grid too coarse for " + std::to_string(lobes) + " lobes");
        const GridOperators ops(g);
        std::vector<std::string> notes;
        PolishResult pol = newton_polish(pd, mu, glue(pd, &notes), cfg.grad_tol, polish_budget, ops);
        int steps = pol.steps;
        if (pol.u.is_zero() || residual(pol.u, pd, mu) > cfg.grad_tol) {
          // Continuation from the mean constant exponents, where equal lobes glue exactly.
          notes.push_back("glued lobes did not polish; continuing from constant exponents");
          auto blend = [&](double tau) {
            auto mix = [tau](const ExponentField& e) {
              double mean = 0.0;
              for (double v : e.values()) mean += v;
              mean /= static_cast<double>(e.size());
              std::vector<double> out(e.size());
              for (std::size_t c = 0; c < out.size(); ++c) out[c] = mean + tau * (e[c] - mean);
              return ExponentField(std::move(out));
            };
            ProblemData b = make_problem(g, mix(pd.p), mix(pd.q), pd.s, pd.V);
            b.c_embed = pd.c_embed;
            return b;
          };
          const ProblemData base = blend(0.0);
          pol = newton_polish(base, mu, glue(base, nullptr), cfg.grad_tol, polish_budget, ops);
          steps += pol.steps;
          GridFunction u = pol.u;
          double tau = 0.0;
          double dtau = 0.25;
          while (tau < 1.0 && dtau >= 1.0 / 4096.0) {
            const double next = std::min(1.0, tau + dtau);
            const ProblemData step_pd = next == 1.0 ? pd : blend(next);
            PolishResult trial = newton_polish(step_pd, mu, u, cfg.grad_tol, polish_budget, ops);
            steps += trial.steps;
            if (!trial.u.is_zero() && residual(trial.u, step_pd, mu) <= cfg.grad_tol) {
              u = std::move(trial.u);
              tau = next;
              dtau *= 1.5;
            } else {
              dtau *= 0.5;
            }
          }
          pol.u = std::move(u);
          if (tau < 1.0) notes.push_back("continuation stopped at tau = " + fmt(tau));
        }
        ep.lambda = mu;
        ep.alpha = alpha;
        ep.mechanism = rep.mechanism;
        ep.u = std::move(pol.u);
        ep.iterations = steps;
        ep.converged = true;
        ep.notes = std::move(notes);
        finish(ep, pd, cfg);
        ep.level = ep.snapshot.I_lambda;
      }
      if (rep.mechanism == Mechanism::ball_min && ep.snapshot.G > alpha * (1.0 + 1e-12)) {
        ep.converged = false;
        ep.notes.push_back("G(u) = " + fmt(ep.snapshot.G) + " exceeds the radius " + fmt(alpha));
      }
    } catch (const Error& e) {
      ep.lambda = mu;
      ep.alpha = alpha;
      ep.mechanism = rep.mechanism;
      ep.converged = false;
      ep.residual = std::numeric_limits<double>::quiet_NaN();
      ep.notes.push_back(e.what());
    }
    rep.members[idx] = std::move(ep);
  });

  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < rep.members.size(); ++a)
    for (std::size_t b = a + 1; b < rep.members.size(); ++b) {
      if (rep.members[a].u.size() == 0 || rep.members[b].u.size() == 0) continue;
      rep.min_gap = std::min(rep.min_gap, nodal_norm(rep.members[a].u - rep.members[b].u));
    }
  rep.distinct = rep.min_gap > 10.0 * cfg.grad_tol;
  if (!rep.distinct) rep.notes.push_back("members are not pairwise distinct");
  return rep;
}

}  // namespace vexspec
