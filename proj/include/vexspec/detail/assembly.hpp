#pragma once

// Free-node linear algebra shared by the functionals and the solvers.

#include <Eigen/Sparse>

#include "vexspec/functionals.hpp"
#include "vexspec/grid.hpp"

namespace vexspec::detail {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

Vec to_free(const GridFunction& u, const StructuredGrid& g);
GridFunction from_free(const StructuredGrid& g, const Vec& x);

/// Cell operators restricted to free nodes.
struct GridOperators {
  explicit GridOperators(const StructuredGrid& g);

  SpMat dx;  ///< cells x free, d/dx per cell
  SpMat dy;  ///< cells x free, d/dy per cell (2D only)
  SpMat avg; ///< cells x free, corner average
  /// Standard 3-point (1D) / 5-point (2D) Dirichlet stiffness times cell
  /// volume, used as the Sobolev metric and preconditioner.
  SpMat stiffness;
};

/// Second derivative of G at u on free nodes.
SpMat hessian_G(const GridFunction& u, const ProblemData& pd, const GridOperators& ops);
/// Second derivative of F at u on free nodes (|u|^{q-2} regularized by
/// kGradientEpsilon where q < 2).
SpMat hessian_F(const GridFunction& u, const ProblemData& pd, const GridOperators& ops);

/// Per-cell coefficients a_c with G(t u) = sum_c a_c t^{p_c}.
struct LevelProfile {
  std::vector<double> coeff;
  std::vector<double> expo;
  double operator()(double t) const;
};
LevelProfile gradient_level_profile(const GridFunction& u, const ProblemData& pd);

/// Bisection for the unique t > 0 with G(t u) = alpha; stops when
/// |G(t u) - alpha| <= tol or the bracket is exhausted.
double scale_to_level(const GridFunction& u, const ProblemData& pd, double alpha,
                      double tol, int* iterations = nullptr);

}  // namespace vexspec::detail
