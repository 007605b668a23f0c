#pragma once

// Tangential descent on the sphere G(u) = alpha.

#include <functional>
#include <vector>

#include <Eigen/SparseCholesky>

#include "vexspec/detail/assembly.hpp"

namespace vexspec::detail {

struct SmoothObjective {
  std::function<double(const GridFunction&)> value;
  /// Nodal gradient (masked).
  std::function<GridFunction(const GridFunction&)> gradient;
};

struct SphereDescentOptions {
  int max_iters = 400;
  /// Stop when the relative tangential gradient drops below this.
  double tol = 1e-10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double step0 = 1.0;
  /// Stop once `stall_window` accepted steps lowered the value by no more
  /// than stall_rtol relative.
  int stall_window = 25;
  double stall_rtol = 1e-13;
  /// Optional early exit, called after every accepted step.
  std::function<bool(const GridFunction&)> done;
};

struct SphereDescentResult {
  GridFunction u;
  double value = 0.0;
  double tangential = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

using Preconditioner = Eigen::SimplicialLDLT<SpMat>;

/// Minimizes `objective` over {G = alpha} from `start` (rescaled onto the
/// sphere first) with Sobolev-preconditioned tangential steps, Armijo
/// backtracking and reprojection after each step.
SphereDescentResult sphere_descent(const ProblemData& pd, double alpha, const GridFunction& start,
                                   const SmoothObjective& objective,
                                   const Preconditioner& precond,
                                   const SphereDescentOptions& opt);

/// Relative rounding slack used in sufficient-decrease tests.
inline constexpr double kRoundingSlack = 64.0 * 2.220446049250313e-16;

}  // namespace vexspec::detail
