#pragma once

// Variational eigenpair solvers: ball minimization (sublinear regime),
// F-maximization on the sphere, mountain pass (superlinear regime), and
// the sweep / family drivers built on them.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vexspec/functionals.hpp"

namespace vexspec {

struct SolverConfig {
  int max_iters = 2000;
  double grad_tol = 1e-8;
  double step0 = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  int path_nodes = 21;
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

enum class Mechanism { ball_min, sphere_max, mountain_pass };
std::string_view to_string(Mechanism m);

struct MountainPassInfo {
  double e1_energy = 0.0;
  double critical_value = 0.0;
  int path_nodes = 0;
  int relocations = 0;
  int refinements = 0;
  int newton_steps = 0;
};

struct EigenPair {
  double lambda = 0.0;
  GridFunction u;
  double residual = 0.0;
  EnergySnapshot snapshot;
  Mechanism mechanism = Mechanism::ball_min;
  bool converged = false;
  int iterations = 0;
  double alpha = 0.0;
  /// F(u) for sphere_max (the first L-S level), I_lambda(u) otherwise.
  double level = 0.0;
  /// Lagrange multiplier <F'(u),u>/<G'(u),u> for sphere_max, NaN otherwise.
  double mu = std::numeric_limits<double>::quiet_NaN();
  /// Monitored objective per accepted step: I_lambda (ball_min, mountain
  /// pass path maximum) or F (sphere_max).
  std::vector<double> history;
  std::vector<std::string> notes;
  std::optional<MountainPassInfo> mountain_pass;
};

struct SphereProjection {
  double t = 0.0;
  GridFunction u;
};

/// The unique t > 0 with |G(t u) - alpha| <= tol, and t u.
SphereProjection project_to_sphere(const GridFunction& u, const ProblemData& pd, double alpha,
                                   double tol);

/// Minimizes I_lambda over the ball G <= alpha. Requires q^- < p^-.
EigenPair solve_sublinear(const ProblemData& pd, double alpha, double lambda,
                          const SolverConfig& cfg);

/// Maximizes F over the sphere G = alpha from seeded Gaussian noise.
EigenPair solve_sphere_max(const ProblemData& pd, double alpha, const SolverConfig& cfg);

/// Mountain-pass critical point of I_lambda between 0 and a far point of
/// negative energy. Requires q^- >= p^+ and q^+ > p^-.
EigenPair solve_mountain_pass(const ProblemData& pd, double alpha, double lambda,
                              const SolverConfig& cfg);

struct SweepRow {
  double lambda = 0.0;
  double alpha = 0.0;
  double residual = 0.0;
  double u_norm = 0.0;  ///< Luxemburg norm of |grad u| in L^{p(x)}
  double I_value = 0.0;
  int iterations = 0;
  Mechanism mechanism = Mechanism::ball_min;
  bool converged = false;
  std::vector<std::string> notes;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<EigenPair> pairs;
  bool all_converged() const;
};

/// Solves every lambda independently (rows run in parallel). Sublinear
/// rows double alpha until lambda < lambda_alpha, superlinear rows halve it.
SweepReport spectrum_sweep(const ProblemData& pd, const std::vector<double>& lambdas,
                           double alpha, const SolverConfig& cfg);

struct FamilyReport {
  double mu = 0.0;
  Mechanism mechanism = Mechanism::ball_min;
  std::vector<double> radii;  ///< ascending
  std::vector<EigenPair> members;
  /// Smallest pairwise nodal distance between members.
  double min_gap = 0.0;
  bool distinct = false;
  std::vector<std::string> notes;
  bool all_converged() const;
};

/// One eigenpair with eigenvalue mu per radius in a boundary regime
/// (q^+ = p^- with q^- < p^-, or q^- = p^+ with q^+ > p^-). Member n, in
/// ascending radius order, has n sign-alternating lobes along the first axis.
FamilyReport eigenfamily(const ProblemData& pd, double mu, const std::vector<double>& radii,
                         const SolverConfig& cfg);

/// Worker count for sweeps and families: VEXSPEC_THREADS if set to a
/// positive integer, otherwise the hardware concurrency.
unsigned thread_cap();

}  // namespace vexspec
