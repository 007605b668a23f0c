#pragma once

// Structured Dirichlet grids on an interval or a rectangle, nodal functions,
// and the node-to-cell bridge (cell gradients, corner averages, cell sums).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace vexspec {

class StructuredGrid {
public:
  StructuredGrid() = default;

  /// (0, length) with `nodes` nodes, both end nodes masked.
  static StructuredGrid interval(double length, std::size_t nodes);
  /// (0, lx) x (0, ly) with nx * ny nodes, the node ring on the boundary masked.
  static StructuredGrid rectangle(double lx, double ly, std::size_t nx, std::size_t ny);

  int dim() const noexcept { return dim_; }
  std::size_t extent(int axis) const noexcept { return extents_[axis]; }
  double spacing(int axis) const noexcept { return spacing_[axis]; }
  double origin(int axis) const noexcept { return origin_[axis]; }
  /// Side length along an axis.
  double length(int axis) const noexcept {
    return spacing_[axis] * static_cast<double>(extents_[axis] - 1);
  }

  std::size_t node_count() const noexcept { return extents_[0] * extents_[1]; }
  std::size_t cell_count() const noexcept {
    return (extents_[0] - 1) * (dim_ == 2 ? extents_[1] - 1 : 1);
  }
  std::size_t corners_per_cell() const noexcept { return dim_ == 2 ? 4 : 2; }
  double cell_volume() const noexcept {
    return dim_ == 2 ? spacing_[0] * spacing_[1] : spacing_[0];
  }
  std::vector<double> cell_volumes() const {
    return std::vector<double>(cell_count(), cell_volume());
  }

  std::size_t node_index(std::size_t i, std::size_t j = 0) const noexcept {
    return j * extents_[0] + i;
  }
  std::size_t cell_index(std::size_t i, std::size_t j = 0) const noexcept {
    return j * (extents_[0] - 1) + i;
  }
  bool on_boundary(std::size_t node) const noexcept { return boundary_[node] != 0; }
  /// Indices of the unmasked nodes, in increasing order.
  std::span<const std::size_t> free_nodes() const noexcept { return free_; }
  /// Position of a node in free_nodes(), or -1 for masked nodes.
  std::ptrdiff_t free_slot(std::size_t node) const noexcept { return slot_[node]; }

  std::array<double, 2> node_coord(std::size_t node) const noexcept;
  std::array<double, 2> cell_center(std::size_t cell) const noexcept;
  /// Corner node ids of a cell; 1D fills the first two entries
  /// (left, right), 2D orders them (i,j), (i+1,j), (i,j+1), (i+1,j+1).
  std::array<std::size_t, 4> cell_corners(std::size_t cell) const noexcept;

  /// Sub-grid spanning nodes first..last (inclusive) along axis 0, with the
  /// same spacing and the corresponding origin. Its cells are cells
  /// first..last-1 of each row of this grid.
  StructuredGrid slice_axis0(std::size_t first, std::size_t last) const;

  bool operator==(const StructuredGrid&) const = default;

private:
  void build_masks();

  int dim_ = 1;
  std::array<std::size_t, 2> extents_{0, 1};
  std::array<double, 2> spacing_{1.0, 1.0};
  std::array<double, 2> origin_{0.0, 0.0};
  std::vector<char> boundary_;
  std::vector<std::size_t> free_;
  std::vector<std::ptrdiff_t> slot_;
};

/// Nodal values of a function in the discrete W_0^{1,p(x)}: exactly zero on
/// every masked node.
class GridFunction {
public:
  GridFunction() = default;
  /// Throws DomainError if a masked node carries a nonzero value.
  GridFunction(const StructuredGrid& grid, std::vector<double> values);

  static GridFunction zero(const StructuredGrid& grid);
  /// Copies `values` and zeroes the masked nodes.
  static GridFunction masked(const StructuredGrid& grid, std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t node) const noexcept { return values_[node]; }
  std::span<const double> values() const noexcept { return values_; }
  bool is_zero() const noexcept;

  GridFunction operator-() const;
  friend GridFunction operator*(double t, const GridFunction& u);
  friend GridFunction operator+(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b);

private:
  explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

/// Euclidean norm of the nodal values.
double nodal_norm(const GridFunction& u);
double dot(const GridFunction& a, const GridFunction& b);

/// Per-cell data: `components` values per cell (1 for scalars, dim for
/// gradients), stored cell-major.
struct CellField {
  std::size_t components = 1;
  std::vector<double> data;

  std::size_t cells() const noexcept { return components ? data.size() / components : 0; }
  double operator()(std::size_t cell, std::size_t k = 0) const noexcept {
    return data[cell * components + k];
  }
  /// Pointwise magnitude of a vector field (the field itself for scalars).
  std::vector<double> magnitude() const;
};

/// Per-cell gradient: 1D forward difference, 2D average of the two
/// opposite-edge differences along each axis.
CellField gradient(const GridFunction& u, const StructuredGrid& g);
/// Per-cell average of the corner values.
CellField cell_values(const GridFunction& u, const StructuredGrid& g);
/// Sum over cells of f_c * vol_c.
double integrate(const CellField& f, const StructuredGrid& g);

}  // namespace vexspec
