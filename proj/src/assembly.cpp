#include "vexspec/detail/assembly.hpp"

#include <cmath>
#include <vector>

#include "vexspec/error.hpp"

namespace vexspec::detail {

Vec to_free(const GridFunction& u, const StructuredGrid& g) {
  const auto free = g.free_nodes();
  Vec x(static_cast<Eigen::Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) x[static_cast<Eigen::Index>(k)] = u[free[k]];
  return x;
}

GridFunction from_free(const StructuredGrid& g, const Vec& x) {
  std::vector<double> v(g.node_count(), 0.0);
  const auto free = g.free_nodes();
  for (std::size_t k = 0; k < free.size(); ++k) v[free[k]] = x[static_cast<Eigen::Index>(k)];
  return GridFunction(g, std::move(v));
}

namespace {

using Triplet = Eigen::Triplet<double>;

void add_if_free(std::vector<Triplet>& t, const StructuredGrid& g, std::size_t row,
                 std::size_t node, double value) {
  const auto slot = g.free_slot(node);
  if (slot >= 0) t.emplace_back(static_cast<int>(row), static_cast<int>(slot), value);
}

SpMat diag_product(const SpMat& left, const std::vector<double>& w, const SpMat& right) {
  Eigen::Map<const Vec> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  SpMat scaled = wv.asDiagonal() * right;
  return SpMat(left.transpose() * scaled);
}

}  // namespace

GridOperators::GridOperators(const StructuredGrid& g) {
  const auto nc = static_cast<Eigen::Index>(g.cell_count());
  const auto nf = static_cast<Eigen::Index>(g.free_nodes().size());
  std::vector<Triplet> tx, ty, ta, tk;
  if (g.dim() == 1) {
    const double h = g.spacing(0);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      add_if_free(tx, g, c, c, -1.0 / h);
      add_if_free(tx, g, c, c + 1, 1.0 / h);
      add_if_free(ta, g, c, c, 0.5);
      add_if_free(ta, g, c, c + 1, 0.5);
    }
  } else {
    const double hx = g.spacing(0);
    const double hy = g.spacing(1);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const auto k = g.cell_corners(c);
      const double sx[4] = {-0.5 / hx, 0.5 / hx, -0.5 / hx, 0.5 / hx};
      const double sy[4] = {-0.5 / hy, -0.5 / hy, 0.5 / hy, 0.5 / hy};
      for (int r = 0; r < 4; ++r) {
        add_if_free(tx, g, c, k[r], sx[r]);
        add_if_free(ty, g, c, k[r], sy[r]);
        add_if_free(ta, g, c, k[r], 0.25);
      }
    }
  }
  dx.resize(nc, nf);
  dx.setFromTriplets(tx.begin(), tx.end());
  avg.resize(nc, nf);
  avg.setFromTriplets(ta.begin(), ta.end());
  if (g.dim() == 2) {
    dy.resize(nc, nf);
    dy.setFromTriplets(ty.begin(), ty.end());
  }

  const double vol = g.cell_volume();
  const double hx = g.spacing(0);
  const double hy = g.spacing(1);
  for (const std::size_t node : g.free_nodes()) {
    const auto row = static_cast<int>(g.free_slot(node));
    const std::size_t i = node % g.extent(0);
    const std::size_t j = node / g.extent(0);
    double diag = 2.0 / (hx * hx);
    auto couple = [&](std::size_t other, double w) {
      const auto slot = g.free_slot(other);
      if (slot >= 0) tk.emplace_back(row, static_cast<int>(slot), -w * vol);
    };
    couple(g.node_index(i - 1, j), 1.0 / (hx * hx));
    couple(g.node_index(i + 1, j), 1.0 / (hx * hx));
    if (g.dim() == 2) {
      diag += 2.0 / (hy * hy);
      couple(g.node_index(i, j - 1), 1.0 / (hy * hy));
      couple(g.node_index(i, j + 1), 1.0 / (hy * hy));
    }
    tk.emplace_back(row, row, diag * vol);
  }
  stiffness.resize(nf, nf);
  stiffness.setFromTriplets(tk.begin(), tk.end());
}

SpMat hessian_G(const GridFunction& u, const ProblemData& pd, const GridOperators& ops) {
  const StructuredGrid& g = pd.grid;
  const CellField grad = gradient(u, g);
  const double vol = g.cell_volume();
  const std::size_t nc = g.cell_count();
  const double eps2 = kGradientEpsilon * kGradientEpsilon;

  if (g.dim() == 1) {
    std::vector<double> w(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      const double p = pd.p[c];
      const double gc = grad.data[c];
      if (p < 2.0) {
        const double r = gc * gc + eps2;
        w[c] = (std::pow(r, 0.5 * (p - 2.0)) + (p - 2.0) * std::pow(r, 0.5 * (p - 4.0)) * gc * gc) * vol;
      } else {
        w[c] = (p - 1.0) * std::pow(std::fabs(gc), p - 2.0) * vol;
      }
    }
    return diag_product(ops.dx, w, ops.dx);
  }

  std::vector<double> wxx(nc), wxy(nc), wyy(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const double p = pd.p[c];
    const double gx = grad.data[2 * c];
    const double gy = grad.data[2 * c + 1];
    double r = gx * gx + gy * gy;
    double a = 0.0;
    double b = 0.0;
    if (p < 2.0) {
      r += eps2;
      a = std::pow(r, 0.5 * (p - 2.0));
      b = (p - 2.0) * std::pow(r, 0.5 * (p - 4.0));
    } else if (r > 0.0) {
      a = std::pow(r, 0.5 * (p - 2.0));
      b = (p - 2.0) * std::pow(r, 0.5 * (p - 4.0));
    } else {
      a = p == 2.0 ? 1.0 : 0.0;
    }
    wxx[c] = (a + b * gx * gx) * vol;
    wxy[c] = b * gx * gy * vol;
    wyy[c] = (a + b * gy * gy) * vol;
  }
  SpMat h = diag_product(ops.dx, wxx, ops.dx);
  const SpMat cross = diag_product(ops.dx, wxy, ops.dy);
  h += cross;
  h += SpMat(cross.transpose());
  h += diag_product(ops.dy, wyy, ops.dy);
  return h;
}

SpMat hessian_F(const GridFunction& u, const ProblemData& pd, const GridOperators& ops) {
  const CellField m = cell_values(u, pd.grid);
  const double vol = pd.grid.cell_volume();
  const double eps2 = kGradientEpsilon * kGradientEpsilon;
  std::vector<double> w(m.data.size());
  for (std::size_t c = 0; c < w.size(); ++c) {
    const double q = pd.q[c];
    const double mc = m.data[c];
    double d = 0.0;
    if (q < 2.0)
      d = std::pow(mc * mc + eps2, 0.5 * (q - 2.0));
    else if (mc != 0.0 || q == 2.0)
      d = std::pow(std::fabs(mc), q - 2.0);
    w[c] = pd.V[c] * (q - 1.0) * d * vol;
  }
  return diag_product(ops.avg, w, ops.avg);
}

double LevelProfile::operator()(double t) const {
  const double lt = std::log(t);
  double s = 0.0;
  for (std::size_t c = 0; c < coeff.size(); ++c)
    if (coeff[c] != 0.0) s += coeff[c] * std::exp(expo[c] * lt);
  return s;
}

LevelProfile gradient_level_profile(const GridFunction& u, const ProblemData& pd) {
  const std::vector<double> mag = gradient(u, pd.grid).magnitude();
  const double vol = pd.grid.cell_volume();
  LevelProfile prof;
  prof.coeff.resize(mag.size());
  prof.expo.assign(pd.p.values().begin(), pd.p.values().end());
  for (std::size_t c = 0; c < mag.size(); ++c)
    prof.coeff[c] = mag[c] == 0.0 ? 0.0 : std::pow(mag[c], pd.p[c]) / pd.p[c] * vol;
  return prof;
}

double scale_to_level(const GridFunction& u, const ProblemData& pd, double alpha, double tol,
                      int* iterations) {
  if (!(alpha > 0.0)) throw DomainError("sphere radius alpha must be positive");
  if (u.is_zero()) throw DomainError("cannot scale the zero function onto a sphere");
  const LevelProfile h = gradient_level_profile(u, pd);
  int it = 0;
  double lo = 1.0;
  double hi = 1.0;
  if (h(1.0) < alpha) {
    while (h(hi) < alpha) {
      lo = hi;
      hi *= 2.0;
      if (++it > 4000 || !std::isfinite(hi)) throw DomainError("scale_to_level: no bracket");
    }
  } else {
    while (h(lo) >= alpha) {
      hi = lo;
      lo *= 0.5;
      if (++it > 4000 || lo == 0.0) throw DomainError("scale_to_level: no bracket");
    }
  }
  double best = hi;
  double best_err = std::fabs(h(hi) - alpha);
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double val = h(mid);
    ++it;
    const double err = std::fabs(val - alpha);
    if (err < best_err) {
      best = mid;
      best_err = err;
    }
    if (err <= tol) break;
    if (val < alpha)
      lo = mid;
    else
      hi = mid;
  }
  if (iterations) *iterations = it;
  return best;
}

}  // namespace vexspec::detail
