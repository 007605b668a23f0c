#include "vexspec/grid.hpp"

#include <cmath>
#include <string>

#include "vexspec/error.hpp"

namespace vexspec {

namespace {

void check_length(double length, const char* what) {
  if (!std::isfinite(length) || !(length > 0.0))
    throw DomainError(std::string(what) + " must be a positive length");
}

}  // namespace

StructuredGrid StructuredGrid::interval(double length, std::size_t nodes) {
  check_length(length, "interval length");
  if (nodes < 3) throw DomainError("a grid axis needs at least 3 nodes");
  StructuredGrid g;
  g.dim_ = 1;
  g.extents_ = {nodes, 1};
  g.spacing_ = {length / static_cast<double>(nodes - 1), 1.0};
  g.build_masks();
  return g;
}

StructuredGrid StructuredGrid::rectangle(double lx, double ly, std::size_t nx,
                                         std::size_t ny) {
  check_length(lx, "rectangle width");
  check_length(ly, "rectangle height");
  if (nx < 3 || ny < 3) throw DomainError("a grid axis needs at least 3 nodes");
  StructuredGrid g;
  g.dim_ = 2;
  g.extents_ = {nx, ny};
  g.spacing_ = {lx / static_cast<double>(nx - 1), ly / static_cast<double>(ny - 1)};
  g.build_masks();
  return g;
}

void StructuredGrid::build_masks() {
  const std::size_t n = node_count();
  boundary_.assign(n, 0);
  slot_.assign(n, -1);
  free_.clear();
  for (std::size_t j = 0; j < extents_[1]; ++j) {
    for (std::size_t i = 0; i < extents_[0]; ++i) {
      bool edge = i == 0 || i + 1 == extents_[0];
      if (dim_ == 2) edge = edge || j == 0 || j + 1 == extents_[1];
      const std::size_t node = node_index(i, j);
      boundary_[node] = edge ? 1 : 0;
      if (!edge) {
        slot_[node] = static_cast<std::ptrdiff_t>(free_.size());
        free_.push_back(node);
      }
    }
  }
}

std::array<double, 2> StructuredGrid::node_coord(std::size_t node) const noexcept {
  const std::size_t i = node % extents_[0];
  const std::size_t j = node / extents_[0];
  return {origin_[0] + spacing_[0] * static_cast<double>(i),
          dim_ == 2 ? origin_[1] + spacing_[1] * static_cast<double>(j) : 0.0};
}

std::array<double, 2> StructuredGrid::cell_center(std::size_t cell) const noexcept {
  const std::size_t nx = extents_[0] - 1;
  const std::size_t i = cell % nx;
  const std::size_t j = cell / nx;
  return {origin_[0] + spacing_[0] * (static_cast<double>(i) + 0.5),
          dim_ == 2 ? origin_[1] + spacing_[1] * (static_cast<double>(j) + 0.5) : 0.0};
}

std::array<std::size_t, 4> StructuredGrid::cell_corners(std::size_t cell) const noexcept {
  const std::size_t nx = extents_[0] - 1;
  const std::size_t i = cell % nx;
  const std::size_t j = cell / nx;
  if (dim_ == 1) return {i, i + 1, 0, 0};
  return {node_index(i, j), node_index(i + 1, j), node_index(i, j + 1),
          node_index(i + 1, j + 1)};
}

StructuredGrid StructuredGrid::slice_axis0(std::size_t first, std::size_t last) const {
  if (last >= extents_[0] || last < first + 2)
    throw DomainError("slice_axis0: need at least 3 nodes inside the grid");
  StructuredGrid g = *this;
  g.extents_[0] = last - first + 1;
  g.origin_[0] = origin_[0] + spacing_[0] * static_cast<double>(first);
  g.build_masks();
  return g;
}

GridFunction::GridFunction(const StructuredGrid& grid, std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() != grid.node_count())
    throw ShapeError("grid function has " + std::to_string(values_.size()) +
                     " values for " + std::to_string(grid.node_count()) + " nodes");
  for (std::size_t n = 0; n < values_.size(); ++n)
    if (grid.on_boundary(n) && values_[n] != 0.0)
      throw DomainError("grid function is nonzero on boundary node " + std::to_string(n));
}

GridFunction GridFunction::zero(const StructuredGrid& grid) {
  return GridFunction(std::vector<double>(grid.node_count(), 0.0));
}

GridFunction GridFunction::masked(const StructuredGrid& grid, std::vector<double> values) {
  if (values.size() != grid.node_count())
    throw ShapeError("grid function has " + std::to_string(values.size()) +
                     " values for " + std::to_string(grid.node_count()) + " nodes");
  for (std::size_t n = 0; n < values.size(); ++n)
    if (grid.on_boundary(n)) values[n] = 0.0;
  return GridFunction(std::move(values));
}

bool GridFunction::is_zero() const noexcept {
  for (double v : values_)
    if (v != 0.0) return false;
  return true;
}

GridFunction GridFunction::operator-() const { return (-1.0) * *this; }

GridFunction operator*(double t, const GridFunction& u) {
  std::vector<double> out(u.values_);
  for (double& v : out) v *= t;
  return GridFunction(std::move(out));
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw ShapeError("grid functions differ in size");
  std::vector<double> out(a.values_);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += b.values_[n];
  return GridFunction(std::move(out));
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  return a + (-1.0) * b;
}

double dot(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw ShapeError("grid functions differ in size");
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

double nodal_norm(const GridFunction& u) { return std::sqrt(dot(u, u)); }

std::vector<double> CellField::magnitude() const {
  std::vector<double> out(cells());
  for (std::size_t c = 0; c < out.size(); ++c) {
    double s = 0.0;
    for (std::size_t k = 0; k < components; ++k) s += data[c * components + k] * data[c * components + k];
    out[c] = components == 1 ? std::fabs(data[c]) : std::sqrt(s);
  }
  return out;
}

namespace {

void check_conforms(const GridFunction& u, const StructuredGrid& g) {
  if (u.size() != g.node_count())
    throw ShapeError("grid function has " + std::to_string(u.size()) + " values for " +
                     std::to_string(g.node_count()) + " nodes");
}

}  // namespace

CellField gradient(const GridFunction& u, const StructuredGrid& g) {
  check_conforms(u, g);
  const std::size_t nc = g.cell_count();
  CellField out{static_cast<std::size_t>(g.dim()), std::vector<double>(nc * g.dim())};
  if (g.dim() == 1) {
    const double h = g.spacing(0);
    for (std::size_t c = 0; c < nc; ++c) out.data[c] = (u[c + 1] - u[c]) / h;
    return out;
  }
  const double hx = g.spacing(0);
  const double hy = g.spacing(1);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto k = g.cell_corners(c);
    out.data[2 * c] = 0.5 * ((u[k[1]] - u[k[0]]) + (u[k[3]] - u[k[2]])) / hx;
    out.data[2 * c + 1] = 0.5 * ((u[k[2]] - u[k[0]]) + (u[k[3]] - u[k[1]])) / hy;
  }
  return out;
}

CellField cell_values(const GridFunction& u, const StructuredGrid& g) {
  check_conforms(u, g);
  const std::size_t nc = g.cell_count();
  CellField out{1, std::vector<double>(nc)};
  if (g.dim() == 1) {
    for (std::size_t c = 0; c < nc; ++c) out.data[c] = 0.5 * (u[c] + u[c + 1]);
    return out;
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const auto k = g.cell_corners(c);
    out.data[c] = 0.25 * (u[k[0]] + u[k[1]] + u[k[2]] + u[k[3]]);
  }
  return out;
}

double integrate(const CellField& f, const StructuredGrid& g) {
  if (f.components != 1) throw ShapeError("integrate: expects a scalar cell field");
  if (f.data.size() != g.cell_count())
    throw ShapeError("integrate: field has " + std::to_string(f.data.size()) +
                     " cells, grid has " + std::to_string(g.cell_count()));
  double s = 0.0;
  for (double v : f.data) s += v;
  return s * g.cell_volume();
}

}  // namespace vexspec
