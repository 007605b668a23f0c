#pragma once

// Problem instances shared by the test binaries.

#include <cmath>
#include <functional>
#include <vector>

#include "vexspec/functionals.hpp"
#include "vexspec/grid.hpp"

namespace fixture {

using Field = std::function<double(double, double)>;

inline std::vector<double> cells(const vexspec::StructuredGrid& g, const Field& f) {
  std::vector<double> v(g.cell_count());
  for (std::size_t c = 0; c < v.size(); ++c) {
    const auto m = g.cell_center(c);
    v[c] = f(m[0], m[1]);
  }
  return v;
}

inline vexspec::ExponentField sample(const vexspec::StructuredGrid& g, const Field& f) {
  return vexspec::ExponentField(cells(g, f));
}

inline Field constant(double a) {
  return [a](double, double) { return a; };
}

inline vexspec::ProblemData problem(const vexspec::StructuredGrid& g, const Field& p,
                                    const Field& q, const Field& s,
                                    const Field& V = constant(1.0)) {
  return vexspec::make_problem(g, sample(g, p), sample(g, q), sample(g, s), cells(g, V));
}

inline vexspec::ProblemData line(std::size_t nodes, double p, double q, double s = 4.0) {
  return problem(vexspec::StructuredGrid::interval(1.0, nodes), constant(p), constant(q),
                 constant(s));
}

/// Nodal sin(pi x) (times sin(pi y) in 2D).
inline vexspec::GridFunction bump(const vexspec::StructuredGrid& g, double amplitude = 1.0) {
  std::vector<double> v(g.node_count());
  for (std::size_t n = 0; n < v.size(); ++n) {
    const auto x = g.node_coord(n);
    double b = std::sin(M_PI * x[0] / g.length(0));
    if (g.dim() == 2) b *= std::sin(M_PI * x[1] / g.length(1));
    v[n] = amplitude * b;
  }
  return vexspec::GridFunction::masked(g, v);
}

}  // namespace fixture
