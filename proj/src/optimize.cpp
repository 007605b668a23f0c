#include "vexspec/detail/optimize.hpp"

#include <cmath>
#include <limits>

#include "vexspec/error.hpp"

namespace vexspec::detail {

namespace {

GridFunction onto_sphere(const GridFunction& u, const ProblemData& pd, double alpha) {
  const double t = scale_to_level(u, pd, alpha, alpha * 1e-14);
  return t * u;
}

}  // namespace

SphereDescentResult sphere_descent(const ProblemData& pd, double alpha, const GridFunction& start,
                                   const SmoothObjective& objective,
                                   const Preconditioner& precond,
                                   const SphereDescentOptions& opt) {
  if (start.is_zero()) throw DomainError("sphere_descent: start must be nonzero");
  const StructuredGrid& g = pd.grid;
  const GridOperators ops(g);

  SphereDescentResult res;
  res.u = onto_sphere(start, pd, alpha);
  res.value = objective.value(res.u);
  res.history.push_back(res.value);

  double step = -1.0;
  for (int it = 0; it < opt.max_iters; ++it) {
    const Vec gj = to_free(objective.gradient(res.u), g);
    const Vec gg = to_free(grad_G(res.u, pd), g);
    const double gg2 = gg.squaredNorm();
    const double gj_norm = gj.norm();
    if (gg2 == 0.0 || gj_norm == 0.0) {
      res.tangential = 0.0;
      res.converged = true;
      break;
    }
    const Vec tangent = gj - (gj.dot(gg) / gg2) * gg;
    res.tangential = tangent.norm() / gj_norm;
    if (res.tangential <= opt.tol) {
      res.converged = true;
      break;
    }

    // K-orthogonal removal of the normal part; slope = -t^T K^-1 t keeps its sign.
    const Vec zj = precond.solve(gj);
    const Vec zg = precond.solve(gg);
    const Vec t = gj - (gg.dot(zj) / gg.dot(zg)) * gg;
    const Vec d = -precond.solve(t);
    const double slope = t.dot(d);
    if (!(slope < 0.0)) break;

    const Vec x = to_free(res.u, g);
    if (step < 0.0) {
      const double dk = std::sqrt(d.dot(ops.stiffness * d));
      step = 0.1 * opt.step0 * std::sqrt(x.dot(ops.stiffness * x)) / dk;
    }

    const double slack = kRoundingSlack * (std::fabs(res.value) + 1e-300);
    auto evaluate = [&](double s, GridFunction* out) {
      const GridFunction raw = from_free(g, x + s * d);
      if (raw.is_zero()) return std::numeric_limits<double>::infinity();
      *out = onto_sphere(raw, pd, alpha);
      const double v = objective.value(*out);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    bool accepted = false;
    bool first_try = true;
    GridFunction best;
    double best_value = 0.0;
    for (int k = 0; k < 60; ++k, first_try = false) {
      const double v = evaluate(step, &best);
      if (v <= res.value + opt.armijo * step * slope + slack) {
        best_value = v;
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) break;
    // Keep scaling the step while the objective keeps improving.
    const double factor = first_try ? 1.0 / opt.backtrack : opt.backtrack;
    for (int k = 0; k < 30; ++k) {
      GridFunction cand;
      const double v = evaluate(step * factor, &cand);
      if (!(v < best_value)) break;
      step *= factor;
      best = std::move(cand);
      best_value = v;
    }
    res.u = std::move(best);
    res.value = best_value;
    res.iterations = it + 1;
    res.history.push_back(res.value);
    if (opt.done && opt.done(res.u)) break;
    const std::size_t n = res.history.size();
    if (opt.stall_window > 0 && n > static_cast<std::size_t>(opt.stall_window)) {
      const double before = res.history[n - 1 - static_cast<std::size_t>(opt.stall_window)];
      if (before - res.value <= opt.stall_rtol * std::fabs(res.value)) break;
    }
  }
  return res;
}

}  // namespace vexspec::detail
