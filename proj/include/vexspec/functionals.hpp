#pragma once

// Energy functionals of the double-nonhomogeneous eigenvalue problem
//   -div(|grad u|^{p(x)-2} grad u) = lambda V(x) |u|^{q(x)-2} u,  u = 0 on the boundary,
// their derivatives, the weak-form residual, Rayleigh quotients and the
// explicit eigenvalue window lambda_alpha.

#include <cstdint>
#include <limits>
#include <vector>

#include "vexspec/exponent.hpp"
#include "vexspec/grid.hpp"

namespace vexspec {

enum class Regime {
  sublinear,    ///< q^- < p^-
  superlinear,  ///< q^- >= p^+ with q != p somewhere
  mixed,        ///< neither
};

/// A full problem instance. Exponents and the weight are cell-sampled.
struct ProblemData {
  StructuredGrid grid;
  ExponentField p;
  ExponentField q;
  ExponentField s;
  std::vector<double> V;
  /// Hoelder constant of the (s, s') pair used to bound the V-weighted modular.
  double c_holder = 0.0;
  /// Embedding constant for ||u||_{s'q} <= C ||grad u||_p; NaN until calibrated.
  double c_embed = std::numeric_limits<double>::quiet_NaN();
  /// ||V||_{s(x)}.
  double v_norm = 0.0;

  std::size_t cells() const noexcept { return grid.cell_count(); }
  /// Cellwise s'(x) q(x).
  ExponentField embedding_target() const;
};

/// Validates shapes, V > 0 and s^- > max(p^+, q^+), then fills c_holder and v_norm.
ProblemData make_problem(StructuredGrid grid, ExponentField p, ExponentField q,
                         ExponentField s, std::vector<double> V);

Regime classify(const ProblemData& pd);
bool is_sublinear(const ProblemData& pd);
/// Every cell has p < q, or more generally q^- >= p^+ with q^+ > p^-.
bool is_superlinear(const ProblemData& pd);

struct EnergySnapshot {
  double G = 0.0;
  double F = 0.0;
  double phi = 0.0;
  double psi = 0.0;
  double I_lambda = 0.0;
  double lambda_used = 0.0;
};

/// G = sum (1/p)|grad u|^p vol, F = sum (V/q)|u|^q vol, psi and phi without
/// the 1/p and 1/q weights, I = G - lambda F.
EnergySnapshot energies(const GridFunction& u, const ProblemData& pd, double lambda);

/// Nodal representation of G'(u): <grad_G(u), v> = sum |grad u|^{p-2} grad u . grad v vol.
GridFunction grad_G(const GridFunction& u, const ProblemData& pd);
/// Nodal representation of F'(u): <grad_F(u), v> = sum V |u|^{q-2} u v vol.
GridFunction grad_F(const GridFunction& u, const ProblemData& pd);
/// Nodal gradients of psi and phi.
GridFunction grad_psi(const GridFunction& u, const ProblemData& pd);
GridFunction grad_phi(const GridFunction& u, const ProblemData& pd);

/// ||G'(u) - lambda F'(u)||_2 / ||G'(u)||_2 over the nodes.
double residual(const GridFunction& u, const ProblemData& pd, double lambda);

/// Regularization of |grad u|^{p-2} for cells with p < 2.
inline constexpr double kGradientEpsilon = 1e-12;

struct LambdaAlpha {
  double value = 0.0;
  /// alpha p^+ >= 1.
  bool large_radius_branch = false;
};

/// The eigenvalue window threshold for the sphere/ball of radius alpha:
/// alpha q^- / (2 C_H C^* ||V||_s max_{a,b in {-,+}} (alpha p^+)^{q^a/p^b}),
/// with C^* = max(C^{q^-}, C^{q^+}).
LambdaAlpha lambda_alpha(const ProblemData& pd, double alpha);

struct EmbeddingEstimate {
  /// Best ratio ||u||_target / ||grad u||_p found; a lower bound on the
  /// discrete best constant.
  double ratio = 0.0;
  GridFunction witness;
  /// Accepted ratio after every iteration, one row per trial.
  std::vector<std::vector<double>> history;
};

/// Multi-start normalized ascent of ||u||_target / ||grad u||_p.
EmbeddingEstimate embedding_ratio(const StructuredGrid& grid, const ExponentField& p,
                                  const ExponentField& target, int trials, int iters,
                                  std::uint64_t seed = 0);

/// Lower bound on the constant of ||u||_{s'q} <= C ||grad u||_p for `pd`.
double embedding_constant(const ProblemData& pd, int trials, int iters,
                          std::uint64_t seed = 0);

/// Returns a copy of `pd` with c_embed = safety_factor * embedding_constant(...).
ProblemData calibrate_embedding(ProblemData pd, int trials = 4, int iters = 200,
                                double safety_factor = 2.0, std::uint64_t seed = 0);

struct RayleighReport {
  double nu_star = 0.0;      ///< inf over the sphere of psi/phi
  double nu_sup = 0.0;       ///< inf over the sphere of G/F
  double lambda_star = 0.0;  ///< inf over the ball of psi/phi
  double mu_star = 0.0;      ///< inf over X of psi/phi with q replaced by p
  int trials = 0;
  GridFunction nu_star_witness;
  GridFunction nu_sup_witness;
  GridFunction lambda_star_witness;
  GridFunction mu_star_witness;
};

struct RayleighOptions {
  int trials = 4;
  int iters = 400;
  double tol = 1e-10;
  /// Each descent also stops once 25 steps gain less than this, relative.
  double stall_rtol = 1e-10;
  /// The ball is explored on the spheres of radius alpha * 2^-k, k = 0..ball_levels.
  int ball_levels = 8;
  std::uint64_t seed = 0;
};

/// Multi-start projected descent estimates of the Rayleigh infima. Every
/// value is realized by the stored witness, so each is an upper bound on
/// the corresponding infimum.
RayleighReport rayleigh_extrema(const ProblemData& pd, double alpha,
                                const RayleighOptions& opt = {});

}  // namespace vexspec
