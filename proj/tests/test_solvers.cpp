#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "instances.hpp"
#include "oracles.hpp"
#include "vexspec/config.hpp"
#include "vexspec/error.hpp"
#include "vexspec/solvers.hpp"

using namespace vexspec;

namespace {

ProblemData from_config(const char* name) {
  return RunConfig::load(std::filesystem::path(VEXSPEC_CONFIG_DIR) / name).build_problem();
}

// Checks shared by every accepted eigenpair.
void expect_certified(const EigenPair& ep, const ProblemData& pd, double tol) {
  ASSERT_TRUE(ep.converged) << (ep.notes.empty() ? "" : ep.notes.back());
  EXPECT_FALSE(ep.u.is_zero());
  EXPECT_LE(ep.residual, tol);
  EXPECT_NEAR(ep.residual, residual(ep.u, pd, ep.lambda), 1e-12);
  const EnergySnapshot e = energies(ep.u, pd, ep.lambda);
  EXPECT_LE(std::fabs(ep.lambda * e.phi - e.psi), 1e-8 * e.psi);
  EXPECT_EQ(residual(-ep.u, pd, ep.lambda), ep.residual);
}

}  // namespace

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.grad_tol = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.backtrack = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.armijo = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.path_nodes = 4;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ProjectToSphere, QuadraticScalingClosedForm) {
  const ProblemData pd = fixture::line(65, 2.0, 2.0);
  GridFunction u = fixture::bump(pd.grid);
  u = std::sqrt(2.0 / energies(u, pd, 0.0).G) * u;
  ASSERT_NEAR(energies(u, pd, 0.0).G, 2.0, 1e-13);
  const SphereProjection sp = project_to_sphere(u, pd, 8.0, 1e-12);
  EXPECT_NEAR(sp.t, 2.0, 1e-12);
  EXPECT_THROW(project_to_sphere(GridFunction::zero(pd.grid), pd, 1.0, 1e-12), DomainError);
}

TEST(ProjectToSphere, HitsTheLevelForVariableExponents) {
  std::mt19937_64 rng(9);
  const ProblemData pd = fixture::problem(
      StructuredGrid::rectangle(1.0, 1.0, 10, 10), [](double x, double y) { return 1.4 + x + y; },
      fixture::constant(2.0), fixture::constant(5.0));
  for (double alpha : {1e-3, 0.5, 7.0, 1e4}) {
    const GridFunction u = GridFunction::masked(pd.grid, oracle::normal_vector(rng, 100));
    const SphereProjection sp = project_to_sphere(u, pd, alpha, 1e-10 * alpha);
    EXPECT_GT(sp.t, 0.0);
    EXPECT_NEAR(energies(sp.u, pd, 0.0).G, alpha, 1e-10 * alpha);
  }
}

TEST(SolveSublinear, CertifiedMinimizerWithMonotoneHistory) {
  const ProblemData pd = calibrate_embedding(fixture::line(65, 3.0, 2.0), 2, 100);
  SolverConfig cfg;
  cfg.seed = 4;
  const double alpha = 64.0;
  const EigenPair ep = solve_sublinear(pd, alpha, 1.0, cfg);
  expect_certified(ep, pd, cfg.grad_tol);
  EXPECT_EQ(ep.mechanism, Mechanism::ball_min);
  EXPECT_LE(ep.snapshot.G, alpha);
  EXPECT_LT(ep.snapshot.I_lambda, 0.0);
  for (std::size_t i = 1; i < ep.history.size(); ++i)
    EXPECT_LE(ep.history[i], ep.history[i - 1] + 1e-12 * std::fabs(ep.history[i - 1]));
}

TEST(SolveSublinear, UnitBallExample) {
  const ProblemData pd = calibrate_embedding(fixture::line(129, 3.0, 2.0));
  const EigenPair ep = solve_sublinear(pd, 1.0, 0.2, SolverConfig{});
  expect_certified(ep, pd, 1e-6);
  EXPECT_LT(ep.snapshot.I_lambda, 0.0);
  EXPECT_LE(ep.snapshot.G, 1.0);
}

TEST(SolveSublinear, ScalingMapCertifiesAnotherEigenvalue) {
  const ProblemData pd = calibrate_embedding(fixture::line(65, 3.0, 2.0), 2, 100);
  const EigenPair ep = solve_sublinear(pd, 64.0, 0.2, SolverConfig{});
  ASSERT_TRUE(ep.converged);
  // residual(t u, t^{p-q} lambda) = residual(u, lambda); t^{p-q} = 2 gives lambda = 0.4.
  const double t = std::pow(2.0, 1.0 / (3.0 - 2.0));
  EXPECT_LT(residual(t * ep.u, pd, 0.4), 1e-5);
}

TEST(SolveSublinear, RegimeChecked) {
  EXPECT_THROW(solve_sublinear(fixture::line(33, 2.0, 3.0), 1.0, 1.0, SolverConfig{}), RegimeError);
  EXPECT_THROW(solve_sublinear(fixture::line(33, 3.0, 2.0), 1.0, -1.0, SolverConfig{}), DomainError);
}

TEST(SolveSphereMax, LinearCaseMatchesTheDiscreteEigenvalue) {
  const ProblemData pd = fixture::line(257, 2.0, 2.0);
  SolverConfig cfg;
  cfg.seed = 3;
  const EigenPair ep = solve_sphere_max(pd, 1.0, cfg);
  expect_certified(ep, pd, cfg.grad_tol);
  const auto [k, m] = oracle::laplace_pencil_1d(257, 1.0);
  const double lam = oracle::generalized_eigenvalue(k, m, 1, 0.0, 100.0);
  EXPECT_NEAR(ep.lambda, lam, 1e-8);
  EXPECT_NEAR(ep.lambda, M_PI * M_PI, 0.01 * M_PI * M_PI);
  // One sign throughout: the first mode.
  double lo = 0.0, hi = 0.0;
  for (std::size_t n : pd.grid.free_nodes()) {
    lo = std::min(lo, ep.u[n]);
    hi = std::max(hi, ep.u[n]);
  }
  EXPECT_TRUE(lo == 0.0 || hi == 0.0);
}

TEST(SolveSphereMax, SeedsAgreeOnTheFirstLevel) {
  const ProblemData pd = fixture::problem(
      StructuredGrid::interval(1.0, 129), [](double x, double) { return 2.4 + 0.4 * x; },
      [](double x, double) { return 1.7 + 0.2 * x; }, fixture::constant(4.0));
  double lo = INFINITY, hi = -INFINITY;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SolverConfig cfg;
    cfg.seed = seed;
    const EigenPair ep = solve_sphere_max(pd, 1.0, cfg);
    ASSERT_TRUE(ep.converged);
    lo = std::min(lo, ep.lambda);
    hi = std::max(hi, ep.lambda);
  }
  EXPECT_LE(hi - lo, 1e-4);
}

TEST(SolveSphereMax, LinearEigenfunctionIsTheSineMode) {
  const ProblemData pd = fixture::line(257, 2.0, 2.0);
  const EigenPair ep = solve_sphere_max(pd, 1.0, SolverConfig{});
  const GridFunction s = fixture::bump(pd.grid);
  const double cosine = std::fabs(dot(ep.u, s)) / (nodal_norm(ep.u) * nodal_norm(s));
  EXPECT_NEAR(cosine, 1.0, 1e-10);
}

TEST(SolveSphereMax, MultiplierAndLevelBounds) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pick(0.0, 0.6);
  for (int k = 0; k < 3; ++k) {
    const double a = pick(rng), b = pick(rng);
    const ProblemData pd = fixture::problem(
        StructuredGrid::interval(1.0, 65), [a](double x, double) { return 2.2 + a * x; },
        [b](double x, double) { return 1.5 + b * x * x; }, fixture::constant(4.0));
    SolverConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(k);
    const double alpha = 0.5 + k;
    const EigenPair ep = solve_sphere_max(pd, alpha, cfg);
    expect_certified(ep, pd, cfg.grad_tol);
    EXPECT_NEAR(ep.snapshot.G, alpha, 1e-10 * alpha);
    EXPECT_NEAR(ep.lambda * ep.mu, 1.0, 1e-10);
    const double mu = dot(grad_F(ep.u, pd), ep.u) / dot(grad_G(ep.u, pd), ep.u);
    EXPECT_NEAR(ep.lambda, 1.0 / mu, 1e-10 * ep.lambda);
    const double level = ep.level;
    EXPECT_DOUBLE_EQ(level, ep.snapshot.F);
    EXPECT_LE(pd.p.lo() / pd.q.hi() * alpha / level, ep.lambda * (1 + 1e-10));
    EXPECT_LE(ep.lambda, pd.p.hi() / pd.q.lo() * alpha / level * (1 + 1e-10));
    for (std::size_t i = 1; i < ep.history.size(); ++i)
      EXPECT_GE(ep.history[i], ep.history[i - 1] * (1 - 1e-12));
  }
}

TEST(SolveSphereMax, NoEigenvalueBelowTheRayleighInfimum) {
  const ProblemData pd = fixture::problem(
      StructuredGrid::interval(1.0, 65), [](double x, double) { return 2.5 + 0.5 * x; },
      [](double x, double) { return 1.6 + 0.3 * x; }, fixture::constant(4.0));
  RayleighOptions opt;
  opt.trials = 2;
  const double alpha = 1.0;
  const RayleighReport r = rayleigh_extrema(pd, alpha, opt);
  const EigenPair ep = solve_sphere_max(pd, alpha, SolverConfig{});
  ASSERT_TRUE(ep.converged);
  EXPECT_GE(ep.lambda, r.nu_star - 1e-8);
}

TEST(SolveSphereMax, DeterministicForAFixedSeed) {
  const ProblemData pd = fixture::line(65, 2.5, 1.8);
  SolverConfig cfg;
  cfg.seed = 11;
  const EigenPair a = solve_sphere_max(pd, 1.0, cfg), b = solve_sphere_max(pd, 1.0, cfg);
  EXPECT_EQ(a.lambda, b.lambda);
  for (std::size_t n = 0; n < a.u.size(); ++n) EXPECT_EQ(a.u[n], b.u[n]);
}

TEST(SolveMountainPass, SuperlinearCriticalPointAboveTheRing) {
  const ProblemData pd = fixture::line(65, 2.0, 4.0, 5.0);
  SolverConfig cfg;
  for (double lam : {0.5, 5.0}) {
    const EigenPair ep = solve_mountain_pass(pd, 1.0, lam, cfg);
    expect_certified(ep, pd, 1e-4);
    EXPECT_EQ(ep.mechanism, Mechanism::mountain_pass);
    ASSERT_TRUE(ep.mountain_pass.has_value());
    EXPECT_LT(ep.mountain_pass->e1_energy, 0.0);
    EXPECT_GT(ep.mountain_pass->critical_value, 0.0);
    EXPECT_NEAR(ep.snapshot.I_lambda, ep.mountain_pass->critical_value, 1e-12);
    EXPECT_GE(ep.mountain_pass->path_nodes, cfg.path_nodes);
  }
}

TEST(SolveMountainPass, LevelAboveHalfTheRadiusInsideTheWindow) {
  const ProblemData pd = calibrate_embedding(fixture::line(65, 2.0, 4.0, 5.0));
  const double alpha = 0.25;  // alpha p^+ < 1
  const LambdaAlpha la = lambda_alpha(pd, alpha);
  ASSERT_FALSE(la.large_radius_branch);
  const EigenPair ep = solve_mountain_pass(pd, alpha, 0.5 * la.value, SolverConfig{});
  expect_certified(ep, pd, 1e-4);
  EXPECT_GE(ep.level, alpha / 2 - 1e-8);
  EXPECT_LT(ep.mountain_pass->e1_energy, 0.0);
}

TEST(SolveMountainPass, RegimeChecked) {
  EXPECT_THROW(solve_mountain_pass(fixture::line(33, 3.0, 2.0), 1.0, 1.0, SolverConfig{}),
               RegimeError);
}

TEST(SpectrumSweep, SublinearRowsAllCertified) {
  const ProblemData pd = calibrate_embedding(fixture::line(65, 3.0, 2.0), 2, 100);
  const SweepReport rep = spectrum_sweep(pd, {0.1, 1.0, 10.0}, 1.0, SolverConfig{});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_TRUE(rep.all_converged());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const SweepRow& row = rep.rows[i];
    EXPECT_LT(row.residual, 1e-5);
    EXPECT_LT(row.lambda, lambda_alpha(pd, row.alpha).value);
    EXPECT_EQ(row.mechanism, Mechanism::ball_min);
    EXPECT_EQ(rep.pairs[i].lambda, row.lambda);
  }
  EXPECT_THROW(spectrum_sweep(pd, {}, 1.0, SolverConfig{}), DomainError);
}

TEST(SpectrumSweep, SingleRowMatchesTheDirectSolve) {
  const ProblemData pd = calibrate_embedding(fixture::line(65, 2.0, 4.0, 5.0), 2, 100);
  SolverConfig cfg;
  cfg.seed = 5;
  const SweepReport rep = spectrum_sweep(pd, {2.0}, 1.0, cfg);
  ASSERT_EQ(rep.rows.size(), 1u);
  const EigenPair direct = solve_mountain_pass(pd, rep.rows[0].alpha, 2.0, cfg);
  EXPECT_EQ(rep.pairs[0].residual, direct.residual);
  for (std::size_t n = 0; n < direct.u.size(); ++n) EXPECT_EQ(rep.pairs[0].u[n], direct.u[n]);
}

TEST(SpectrumSweep, ThreadCountDoesNotChangeResults) {
  const ProblemData pd = fixture::line(65, 2.0, 4.0, 5.0);
  ::setenv("VEXSPEC_THREADS", "1", 1);
  EXPECT_EQ(thread_cap(), 1u);
  const SweepReport one = spectrum_sweep(pd, {0.5, 2.0}, 1.0, SolverConfig{});
  ::setenv("VEXSPEC_THREADS", "4", 1);
  EXPECT_EQ(thread_cap(), 4u);
  const SweepReport four = spectrum_sweep(pd, {0.5, 2.0}, 1.0, SolverConfig{});
  ::unsetenv("VEXSPEC_THREADS");
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].residual, four.rows[i].residual);
    EXPECT_EQ(one.rows[i].I_value, four.rows[i].I_value);
  }
}

TEST(Eigenfamily, ConstantExponentsAreRejected) {
  EXPECT_THROW(eigenfamily(fixture::line(33, 2.0, 2.0), 1.0, {1.0, 2.0}, SolverConfig{}),
               DomainError);
}

TEST(Eigenfamily, SublinearBoundaryRegime) {
  const ProblemData pd = from_config("family_sublinear.json");
  const FamilyReport rep = eigenfamily(pd, 0.3, {1.0, 2.0, 4.0}, SolverConfig{});
  ASSERT_EQ(rep.members.size(), 3u);
  EXPECT_TRUE(rep.all_converged());
  EXPECT_TRUE(rep.distinct);
  EXPECT_GT(rep.min_gap, 10 * SolverConfig{}.grad_tol);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rep.members[i].lambda, 0.3);
    EXPECT_LT(rep.members[i].residual, 1e-5);
    EXPECT_LE(rep.members[i].snapshot.G, rep.radii[i] * (1 + 1e-12));
  }
}

TEST(Eigenfamily, SuperlinearLevelsIncreaseWithRadius) {
  const ProblemData pd = from_config("family_superlinear.json");
  const FamilyReport rep = eigenfamily(pd, 1.0, {0.2, 0.05, 0.1}, SolverConfig{});
  ASSERT_EQ(rep.members.size(), 3u);
  EXPECT_TRUE(rep.all_converged());
  EXPECT_TRUE(rep.distinct);
  EXPECT_EQ(rep.radii, (std::vector<double>{0.05, 0.1, 0.2}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(rep.members[i].residual, 1e-5);
  EXPECT_LT(rep.members[0].level, rep.members[1].level);
  EXPECT_LT(rep.members[1].level, rep.members[2].level);
}
