#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vortexlab/geometry.hpp"

namespace vortexlab {

/// Tensor-product grid covering a domain. Node (i, j) sits at (xs[i], ys[j]) and has flat
/// index j * nx + i (row-major, rows run along x). Uniform grids also carry their spacings;
/// graded grids report hx = hy = 0 and are described by the coordinate arrays alone.
struct Grid {
  DomainShape shape;
  int nx = 0;
  int ny = 0;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<std::uint8_t> mask;  // 1 where the node is strictly inside the domain
  bool uniform = true;
  double hx = 0.0;
  double hy = 0.0;

  explicit Grid(DomainShape s) : shape(std::move(s)) {}

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec2 node(int i, int j) const { return {xs[i], ys[j]}; }
  Vec2 origin() const { return {xs.front(), ys.front()}; }
  bool inside(int i, int j) const { return mask[index(i, j)] != 0; }
  int interior_count() const;

  /// Dual-cell widths (half the distance between the two neighbouring lines).
  double dual_x(int i) const;
  double dual_y(int j) const;
  double min_spacing() const;
  /// Largest spacing among the lines adjacent to the point.
  double local_spacing(Vec2 p) const;

  /// Cell containing p: largest i with xs[i] <= p.x (clamped so that i + 1 is valid).
  int cell_x(double x) const;
  int cell_y(double y) const;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Uniform grid with n nodes spanning the bounding box on each axis, plus one extra line on each
/// side (`margin` lines in general), so hx = box width / (n - 1).
GridPtr make_grid(const DomainShape& shape, int n, int margin = 1);

/// Local refinement request for graded grids: spacing grows linearly away from `center`
/// from h_min until it reaches the base spacing.
struct Refinement {
  Vec2 center;
  double h_min = 0.0;
};

/// Graded tensor grid: base spacing from make_grid(shape, n); near each refinement center the
/// line spacing is min(base, h_min + growth * |x - c|) along each axis, and the center
/// coordinates are grid lines.
GridPtr make_graded_grid(const DomainShape& shape, int n, const std::vector<Refinement>& refinements,
                         double growth = 0.1);

/// Keep every other grid line (the h -> 2h companion of a grid).
GridPtr coarsen_grid(const Grid& grid);

/// Build a grid from explicit coordinate arrays (used by the field reader).
GridPtr grid_from_coordinates(const DomainShape& shape, std::vector<double> xs, std::vector<double> ys);

/// Scalar field on a grid. Exterior nodes hold the Dirichlet value 0.
struct GridField {
  GridPtr grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}
  GridField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {}

  double& at(int i, int j) { return values[grid->index(i, j)]; }
  double at(int i, int j) const { return values[grid->index(i, j)]; }

  /// Bilinear interpolation; points outside the grid return 0.
  double sample(Vec2 p) const;
  double sup_norm() const;
};

/// Sample a function at every interior node (exterior nodes stay 0).
template <class F>
GridField sample_field(const GridPtr& grid, F&& f) {
  GridField out(grid);
  for (int j = 0; j < grid->ny; ++j)
    for (int i = 0; i < grid->nx; ++i)
      if (grid->inside(i, j)) out.at(i, j) = f(grid->node(i, j));
  return out;
}

}  // namespace vortexlab
