#include "vexspec/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "vexspec/detail/assembly.hpp"
#include "vexspec/detail/optimize.hpp"
#include "vexspec/detail/parallel.hpp"
#include "vexspec/error.hpp"

namespace vexspec {

using detail::Vec;

ExponentField ProblemData::embedding_target() const { return product(conjugate(s), q); }

ProblemData make_problem(StructuredGrid grid, ExponentField p, ExponentField q, ExponentField s,
                         std::vector<double> V) {
  const std::size_t nc = grid.cell_count();
  if (p.size() != nc || q.size() != nc || s.size() != nc || V.size() != nc)
    throw ShapeError("make_problem: p, q, s and V must have one value per cell (" +
                     std::to_string(nc) + ")");
  for (std::size_t c = 0; c < nc; ++c)
    if (!std::isfinite(V[c]) || !(V[c] > 0.0))
      throw DomainError("weight V must be positive; cell " + std::to_string(c) + " has " +
                        std::to_string(V[c]));
  if (!(s.lo() > std::max(p.hi(), q.hi())))
    throw DomainError("s^- must exceed max(p^+, q^+)");

  ProblemData pd;
  pd.grid = std::move(grid);
  pd.p = std::move(p);
  pd.q = std::move(q);
  pd.s = std::move(s);
  pd.V = std::move(V);
  pd.c_holder = holder_constant(pd.s);
  const std::vector<double> vol = pd.grid.cell_volumes();
  pd.v_norm = luxemburg_norm(pd.V, pd.s, vol).norm;
  return pd;
}

bool is_sublinear(const ProblemData& pd) { return pd.q.lo() < pd.p.lo(); }

bool is_superlinear(const ProblemData& pd) {
  if (pd.q.lo() >= pd.p.hi()) return pd.q.hi() > pd.p.lo();
  for (std::size_t c = 0; c < pd.cells(); ++c)
    if (!(pd.p[c] < pd.q[c])) return false;
  return true;
}

Regime classify(const ProblemData& pd) {
  if (is_sublinear(pd)) return Regime::sublinear;
  if (is_superlinear(pd)) return Regime::superlinear;
  return Regime::mixed;
}

namespace {

void check_conforms(const GridFunction& u, const ProblemData& pd) {
  if (u.size() != pd.grid.node_count())
    throw ShapeError("grid function has " + std::to_string(u.size()) + " values for " +
                     std::to_string(pd.grid.node_count()) + " nodes");
}

// D^T flux over all nodes, then masked.
GridFunction scatter_gradient(const StructuredGrid& g, const CellField& flux) {
  std::vector<double> out(g.node_count(), 0.0);
  if (g.dim() == 1) {
    const double h = g.spacing(0);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      out[c] -= flux.data[c] / h;
      out[c + 1] += flux.data[c] / h;
    }
  } else {
    const double hx = g.spacing(0);
    const double hy = g.spacing(1);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto k = g.cell_corners(c);
      const double fx = 0.5 * flux.data[2 * c] / hx;
      const double fy = 0.5 * flux.data[2 * c + 1] / hy;
      out[k[0]] += -fx - fy;
      out[k[1]] += fx - fy;
      out[k[2]] += -fx + fy;
      out[k[3]] += fx + fy;
    }
  }
  return GridFunction::masked(g, std::move(out));
}

// A^T w over all nodes, then masked.
GridFunction scatter_average(const StructuredGrid& g, const std::vector<double>& w) {
  std::vector<double> out(g.node_count(), 0.0);
  const std::size_t corners = g.corners_per_cell();
  const double share = 1.0 / static_cast<double>(corners);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto k = g.cell_corners(c);
    for (std::size_t r = 0; r < corners; ++r) out[k[r]] += share * w[c];
  }
  return GridFunction::masked(g, std::move(out));
}

// Nodal gradient of sum_c weight_c |grad u|_c^{p_c} vol, with weight 1/p (G) or 1 (psi).
GridFunction gradient_energy_derivative(const GridFunction& u, const ProblemData& pd,
                                        bool psi_weights) {
  check_conforms(u, pd);
  const StructuredGrid& g = pd.grid;
  CellField flux = gradient(u, g);
  const std::size_t dim = flux.components;
  const double vol = g.cell_volume();
  const double eps2 = kGradientEpsilon * kGradientEpsilon;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double p = pd.p[c];
    double r = 0.0;
    for (std::size_t k = 0; k < dim; ++k) r += flux.data[c * dim + k] * flux.data[c * dim + k];
    const double w = p < 2.0 ? std::pow(r + eps2, 0.5 * (p - 2.0)) : std::pow(r, 0.5 * (p - 2.0));
    const double scale = w * vol * (psi_weights ? p : 1.0);
    for (std::size_t k = 0; k < dim; ++k) flux.data[c * dim + k] *= scale;
  }
  return scatter_gradient(g, flux);
}

GridFunction value_energy_derivative(const GridFunction& u, const ProblemData& pd,
                                     bool phi_weights) {
  check_conforms(u, pd);
  const StructuredGrid& g = pd.grid;
  const CellField m = cell_values(u, g);
  const double vol = g.cell_volume();
  std::vector<double> w(g.cell_count());
  for (std::size_t c = 0; c < w.size(); ++c) {
    const double mc = m.data[c];
    const double q = pd.q[c];
    const double mag = mc == 0.0 ? 0.0 : std::pow(std::fabs(mc), q - 1.0);
    w[c] = pd.V[c] * std::copysign(mag, mc) * vol * (phi_weights ? q : 1.0);
  }
  return scatter_average(g, w);
}

}  // namespace

EnergySnapshot energies(const GridFunction& u, const ProblemData& pd, double lambda) {
  check_conforms(u, pd);
  const StructuredGrid& g = pd.grid;
  const std::vector<double> gmag = gradient(u, g).magnitude();
  const CellField m = cell_values(u, g);
  const double vol = g.cell_volume();
  EnergySnapshot e;
  e.lambda_used = lambda;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double a = gmag[c] == 0.0 ? 0.0 : std::pow(gmag[c], pd.p[c]);
    const double b = m.data[c] == 0.0 ? 0.0 : pd.V[c] * std::pow(std::fabs(m.data[c]), pd.q[c]);
    if (!std::isfinite(a) || !std::isfinite(b)) {
      const auto x = g.cell_center(c);
      throw OverflowError("energies: non-finite integrand in cell " + std::to_string(c) +
                              " at (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ")",
                          c);
    }
    e.psi += a * vol;
    e.G += a / pd.p[c] * vol;
    e.phi += b * vol;
    e.F += b / pd.q[c] * vol;
  }
  e.I_lambda = e.G - lambda * e.F;
  if (!std::isfinite(e.I_lambda)) throw OverflowError("energies: non-finite total", 0);
  return e;
}

GridFunction grad_G(const GridFunction& u, const ProblemData& pd) {
  return gradient_energy_derivative(u, pd, false);
}
GridFunction grad_psi(const GridFunction& u, const ProblemData& pd) {
  return gradient_energy_derivative(u, pd, true);
}
GridFunction grad_F(const GridFunction& u, const ProblemData& pd) {
  return value_energy_derivative(u, pd, false);
}
GridFunction grad_phi(const GridFunction& u, const ProblemData& pd) {
  return value_energy_derivative(u, pd, true);
}

double residual(const GridFunction& u, const ProblemData& pd, double lambda) {
  check_conforms(u, pd);
  if (u.is_zero()) throw DomainError("residual: eigenfunctions are nontrivial (u is zero)");
  const GridFunction gg = grad_G(u, pd);
  const GridFunction gf = grad_F(u, pd);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n < gg.size(); ++n) {
    const double r = gg[n] - lambda * gf[n];
    num += r * r;
    den += gg[n] * gg[n];
  }
  if (den == 0.0) throw DomainError("residual: G'(u) vanishes");
  return std::sqrt(num / den);
}

LambdaAlpha lambda_alpha(const ProblemData& pd, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw DomainError("lambda_alpha: alpha must be positive");
  if (!(pd.c_holder > 0.0) || !(pd.c_embed > 0.0) || !(pd.v_norm > 0.0) ||
      !std::isfinite(pd.c_embed))
    throw DomainError("lambda_alpha: C_H, C_embed and ||V|| must be positive (calibrate first)");
  const double pm = pd.p.lo();
  const double pp = pd.p.hi();
  const double qm = pd.q.lo();
  const double qp = pd.q.hi();
  const double base = alpha * pp;
  const double worst = std::max({std::pow(base, qm / pm), std::pow(base, qm / pp),
                                 std::pow(base, qp / pm), std::pow(base, qp / pp)});
  const double c_star = std::max(std::pow(pd.c_embed, qm), std::pow(pd.c_embed, qp));
  LambdaAlpha out;
  out.value = alpha * qm / (2.0 * pd.c_holder * c_star * pd.v_norm * worst);
  out.large_radius_branch = base >= 1.0;
  return out;
}

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), 0x5eedu};
  return std::mt19937_64(seq);
}

GridFunction random_start(const StructuredGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(g.node_count());
  for (double& x : v) x = normal(rng);
  return GridFunction::masked(g, std::move(v));
}

struct NormWithGradient {
  double norm = 0.0;
  std::vector<double> d_norm;  // per-cell derivative with respect to |f_c|
};

NormWithGradient norm_with_gradient(const std::vector<double>& f, const ExponentField& r,
                                    const std::vector<double>& vol) {
  NormWithGradient out;
  out.norm = luxemburg_norm(f, r, vol).norm;
  out.d_norm.assign(f.size(), 0.0);
  if (out.norm == 0.0) return out;
  double s = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    const double a = std::fabs(f[c]) / out.norm;
    if (a > 0.0) s += r[c] * std::pow(a, r[c]) * vol[c];
  }
  for (std::size_t c = 0; c < f.size(); ++c) {
    const double a = std::fabs(f[c]) / out.norm;
    if (a > 0.0) out.d_norm[c] = r[c] * std::pow(a, r[c] - 1.0) * vol[c] / s;
  }
  return out;
}

class EmbeddingRatio {
public:
  EmbeddingRatio(const StructuredGrid& g, const ExponentField& p, const ExponentField& target)
      : g_(g), p_(p), target_(target), vol_(g.cell_volumes()) {}

  double value(const GridFunction& u) const {
    const double num = luxemburg_norm(cell_values(u, g_).data, target_, vol_).norm;
    const double den = luxemburg_norm(gradient(u, g_).magnitude(), p_, vol_).norm;
    return num / den;
  }

  GridFunction derivative(const GridFunction& u, double* ratio) const {
    const CellField m = cell_values(u, g_);
    const CellField grad = gradient(u, g_);
    const std::vector<double> gmag = grad.magnitude();
    const NormWithGradient num = norm_with_gradient(m.data, target_, vol_);
    const NormWithGradient den = norm_with_gradient(gmag, p_, vol_);
    const double r = num.norm / den.norm;
    if (ratio) *ratio = r;

    std::vector<double> wn(m.data.size());
    for (std::size_t c = 0; c < wn.size(); ++c)
      wn[c] = std::copysign(num.d_norm[c], m.data[c]) / den.norm;
    const GridFunction part_num = scatter_average(g_, wn);

    CellField flux = grad;
    const std::size_t dim = grad.components;
    for (std::size_t c = 0; c < gmag.size(); ++c) {
      const double f = gmag[c] > 0.0 ? den.d_norm[c] / gmag[c] : 0.0;
      for (std::size_t k = 0; k < dim; ++k) flux.data[c * dim + k] *= -r / den.norm * f;
    }
    // scatter_gradient applies D^T; the cell volume is already inside d_norm.
    return part_num + scatter_gradient(g_, flux);
  }

private:
  const StructuredGrid& g_;
  const ExponentField& p_;
  const ExponentField& target_;
  std::vector<double> vol_;
};

}  // namespace

EmbeddingEstimate embedding_ratio(const StructuredGrid& grid, const ExponentField& p,
                                  const ExponentField& target, int trials, int iters,
                                  std::uint64_t seed) {
  if (trials < 1 || iters < 1) throw DomainError("embedding_ratio: trials and iters must be >= 1");
  if (p.size() != grid.cell_count() || target.size() != grid.cell_count())
    throw ShapeError("embedding_ratio: exponent fields must be cell-sampled on the grid");

  const detail::GridOperators ops(grid);
  const detail::Preconditioner precond(ops.stiffness);
  const EmbeddingRatio ratio(grid, p, target);

  struct Trial {
    double ratio = 0.0;
    GridFunction u;
    std::vector<double> history;
  };
  std::vector<Trial> runs(static_cast<std::size_t>(trials));
  detail::parallel_for(runs.size(), [&](std::size_t t) {
    auto rng = trial_rng(seed, static_cast<int>(t));
    GridFunction u = random_start(grid, rng);
    u = (1.0 / nodal_norm(u)) * u;
    double r = 0.0;
    std::vector<double> hist;
    double step = -1.0;
    int flat = 0;
    for (int it = 0; it < iters; ++it) {
      const GridFunction du = ratio.derivative(u, &r);
      if (it == 0) hist.push_back(r);
      const Vec g = detail::to_free(du, grid);
      const Vec d = precond.solve(g);
      const Vec x = detail::to_free(u, grid);
      const double dk = std::sqrt(d.dot(ops.stiffness * d));
      if (!(dk > 0.0)) break;
      if (step < 0.0) step = 0.5 * std::sqrt(x.dot(ops.stiffness * x)) / dk;
      bool accepted = false;
      for (int k = 0; k < 60; ++k) {
        const GridFunction trial = detail::from_free(grid, x + step * d);
        if (!trial.is_zero()) {
          const double rt = ratio.value(trial);
          if (rt > r) {
            flat = (rt - r) <= 1e-14 * r ? flat + 1 : 0;
            u = (1.0 / nodal_norm(trial)) * trial;
            r = rt;
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted) break;
      hist.push_back(r);
      step *= 2.0;
      if (flat >= 3) break;
    }
    runs[t] = {r, std::move(u), std::move(hist)};
  });

  EmbeddingEstimate best;
  for (Trial& run : runs) {
    if (run.ratio > best.ratio) {
      best.ratio = run.ratio;
      best.witness = run.u;
    }
    best.history.push_back(std::move(run.history));
  }
  return best;
}

double embedding_constant(const ProblemData& pd, int trials, int iters, std::uint64_t seed) {
  return embedding_ratio(pd.grid, pd.p, pd.embedding_target(), trials, iters, seed).ratio;
}

ProblemData calibrate_embedding(ProblemData pd, int trials, int iters, double safety_factor,
                                std::uint64_t seed) {
  if (!(safety_factor >= 1.0)) throw DomainError("safety factor must be >= 1");
  pd.c_embed = safety_factor * embedding_constant(pd, trials, iters, seed);
  return pd;
}

namespace {

detail::SmoothObjective psi_over_phi(const ProblemData& pd) {
  return {[&pd](const GridFunction& u) {
            const EnergySnapshot e = energies(u, pd, 0.0);
            return e.psi / e.phi;
          },
          [&pd](const GridFunction& u) {
            const EnergySnapshot e = energies(u, pd, 0.0);
            const double j = e.psi / e.phi;
            return (1.0 / e.phi) * (grad_psi(u, pd) - j * grad_phi(u, pd));
          }};
}

detail::SmoothObjective g_over_f(const ProblemData& pd) {
  return {[&pd](const GridFunction& u) {
            const EnergySnapshot e = energies(u, pd, 0.0);
            return e.G / e.F;
          },
          [&pd](const GridFunction& u) {
            const EnergySnapshot e = energies(u, pd, 0.0);
            const double j = e.G / e.F;
            return (1.0 / e.F) * (grad_G(u, pd) - j * grad_F(u, pd));
          }};
}

struct Candidate {
  double value = std::numeric_limits<double>::infinity();
  GridFunction u;
  void offer(double v, const GridFunction& w) {
    if (v < value) {
      value = v;
      u = w;
    }
  }
};

}  // namespace

RayleighReport rayleigh_extrema(const ProblemData& pd, double alpha, const RayleighOptions& opt) {
  if (!(alpha > 0.0)) throw DomainError("rayleigh_extrema: alpha must be positive");
  if (opt.trials < 1) throw DomainError("rayleigh_extrema: trials must be >= 1");
  const detail::GridOperators ops(pd.grid);
  const detail::Preconditioner precond(ops.stiffness);
  detail::SphereDescentOptions dopt;
  dopt.max_iters = opt.iters;
  dopt.tol = opt.tol;
  dopt.stall_rtol = opt.stall_rtol;

  const auto j_psi = psi_over_phi(pd);
  const auto j_g = g_over_f(pd);

  // Every sphere candidate is scored under both quotients.
  std::vector<GridFunction> sphere_points(2 * static_cast<std::size_t>(opt.trials));
  detail::parallel_for(sphere_points.size(), [&](std::size_t i) {
    auto rng = trial_rng(opt.seed, static_cast<int>(i / 2));
    const GridFunction start = random_start(pd.grid, rng);
    sphere_points[i] = detail::sphere_descent(pd, alpha, start, i % 2 ? j_g : j_psi, precond, dopt).u;
  });
  Candidate nu_star, nu_sup;
  for (const GridFunction& u : sphere_points) {
    const EnergySnapshot e = energies(u, pd, 0.0);
    nu_star.offer(e.psi / e.phi, u);
    nu_sup.offer(e.G / e.F, u);
  }

  // The ball chain and the homogeneous chain are independent warm-started sweeps.
  ProblemData homogeneous = pd;
  homogeneous.q = pd.p;
  const auto j_hom = psi_over_phi(homogeneous);
  Candidate ball = nu_star;
  Candidate whole;
  detail::parallel_for(2, [&](std::size_t chain) {
    GridFunction start = nu_star.u;
    if (chain == 0) {
      for (int k = 1; k <= opt.ball_levels; ++k) {
        const double radius = alpha * std::ldexp(1.0, -k);
        const auto res = detail::sphere_descent(pd, radius, start, j_psi, precond, dopt);
        const EnergySnapshot e = energies(res.u, pd, 0.0);
        ball.offer(e.psi / e.phi, res.u);
        start = res.u;
      }
      return;
    }
    for (int k = -opt.ball_levels; k <= opt.ball_levels; ++k) {
      const double radius = alpha * std::ldexp(1.0, k);
      const auto res = detail::sphere_descent(homogeneous, radius, start, j_hom, precond, dopt);
      const EnergySnapshot e = energies(res.u, homogeneous, 0.0);
      whole.offer(e.psi / e.phi, res.u);
      start = res.u;
    }
  });

  RayleighReport out;
  out.trials = opt.trials;
  out.nu_star = nu_star.value;
  out.nu_star_witness = nu_star.u;
  out.nu_sup = nu_sup.value;
  out.nu_sup_witness = nu_sup.u;
  out.lambda_star = ball.value;
  out.lambda_star_witness = ball.u;
  out.mu_star = whole.value;
  out.mu_star_witness = whole.u;
  return out;
}

}  // namespace vexspec
