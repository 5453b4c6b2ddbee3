#include "vortexlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vortexlab {

int Grid::interior_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double Grid::dual_x(int i) const {
  const double left = i > 0 ? xs[i] - xs[i - 1] : xs[1] - xs[0];
  const double right = i + 1 < nx ? xs[i + 1] - xs[i] : xs[nx - 1] - xs[nx - 2];
  return 0.5 * (left + right);
}

double Grid::dual_y(int j) const {
  const double lower = j > 0 ? ys[j] - ys[j - 1] : ys[1] - ys[0];
  const double upper = j + 1 < ny ? ys[j + 1] - ys[j] : ys[ny - 1] - ys[ny - 2];
  return 0.5 * (lower + upper);
}

double Grid::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < nx; ++i) h = std::min(h, xs[i + 1] - xs[i]);
  for (int j = 0; j + 1 < ny; ++j) h = std::min(h, ys[j + 1] - ys[j]);
  return h;
}

int Grid::cell_x(double x) const {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const int i = static_cast<int>(it - xs.begin()) - 1;
  return std::clamp(i, 0, nx - 2);
}

int Grid::cell_y(double y) const {
  auto it = std::upper_bound(ys.begin(), ys.end(), y);
  const int j = static_cast<int>(it - ys.begin()) - 1;
  return std::clamp(j, 0, ny - 2);
}

double Grid::local_spacing(Vec2 p) const {
  const int i = cell_x(p.x);
  const int j = cell_y(p.y);
  return std::max(xs[i + 1] - xs[i], ys[j + 1] - ys[j]);
}

namespace {

void fill_mask(Grid& g) {
  g.mask.assign(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) g.mask[g.index(i, j)] = g.shape.contains(g.node(i, j)) ? 1 : 0;
}

struct AxisRefinement {
  double center;
  double h_min;
};

// Lines on [lo, hi] whose spacing follows min(h0, h_min + growth |x - c|); the segment ends and
// every center are lines.
std::vector<double> graded_axis(double lo, double hi, double h0, std::vector<AxisRefinement> refs,
                                double growth) {
  auto spacing = [&](double x) {
    double s = h0;
    for (const auto& r : refs) s = std::min(s, r.h_min + growth * std::abs(x - r.center));
    return s;
  };
  std::vector<double> anchors{lo, hi};
  for (const auto& r : refs)
    if (r.center > lo && r.center < hi) anchors.push_back(r.center);
  std::sort(anchors.begin(), anchors.end());
  std::vector<double> merged;
  for (double a : anchors) {
    if (!merged.empty() && a - merged.back() < 0.5 * spacing(a)) continue;
    merged.push_back(a);
  }
  if (merged.back() != hi) merged.back() = hi;

  std::vector<double> out{merged.front()};
  for (std::size_t s = 0; s + 1 < merged.size(); ++s) {
    const double a = merged[s];
    const double b = merged[s + 1];
    // Cumulative cell count F(x) = int_a^x dt / spacing(t), tabulated on a fine march.
    std::vector<double> px{a};
    std::vector<double> pf{0.0};
    double x = a;
    while (x < b) {
      const double dx = std::min(spacing(x) / 64.0, b - x);
      const double xn = x + dx;
      pf.push_back(pf.back() + 0.5 * dx * (1.0 / spacing(x) + 1.0 / spacing(xn)));
      px.push_back(xn);
      x = xn;
    }
    px.back() = b;
    const double total = pf.back();
    const int cells = std::max(1, static_cast<int>(std::ceil(total - 1e-9)));
    std::size_t k = 0;
    for (int c = 1; c < cells; ++c) {
      const double target = total * c / cells;
      while (pf[k + 1] < target) ++k;
      const double w = (target - pf[k]) / (pf[k + 1] - pf[k]);
      out.push_back(px[k] + w * (px[k + 1] - px[k]));
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace

GridPtr make_grid(const DomainShape& shape, int n, int margin) {
  if (n < 17) throw Error(ErrorKind::InvalidArgument, "grid needs at least 17 nodes per axis");
  if (margin < 1) throw Error(ErrorKind::InvalidArgument, "grid margin must be at least 1");
  auto g = std::make_shared<Grid>(shape);
  const BoundingBox box = shape.bounding_box();
  g->hx = (box.hi.x - box.lo.x) / (n - 1);
  g->hy = (box.hi.y - box.lo.y) / (n - 1);
  g->nx = n + 2 * margin;
  g->ny = n + 2 * margin;
  g->xs.resize(g->nx);
  g->ys.resize(g->ny);
  for (int i = 0; i < g->nx; ++i) g->xs[i] = box.lo.x + (i - margin) * g->hx;
  for (int j = 0; j < g->ny; ++j) g->ys[j] = box.lo.y + (j - margin) * g->hy;
  g->uniform = true;
  fill_mask(*g);
  return g;
}

GridPtr make_graded_grid(const DomainShape& shape, int n, const std::vector<Refinement>& refinements,
                         double growth) {
  if (n < 17) throw Error(ErrorKind::InvalidArgument, "grid needs at least 17 nodes per axis");
  if (!(growth > 0.0)) throw Error(ErrorKind::InvalidArgument, "growth must be positive");
  const BoundingBox box = shape.bounding_box();
  const double h0x = (box.hi.x - box.lo.x) / (n - 1);
  const double h0y = (box.hi.y - box.lo.y) / (n - 1);
  std::vector<AxisRefinement> rx;
  std::vector<AxisRefinement> ry;
  for (const auto& r : refinements) {
    if (!(r.h_min > 0.0)) throw Error(ErrorKind::InvalidArgument, "refinement h_min must be positive");
    rx.push_back({r.center.x, std::min(r.h_min, h0x)});
    ry.push_back({r.center.y, std::min(r.h_min, h0y)});
  }
  auto g = std::make_shared<Grid>(shape);
  g->xs = graded_axis(box.lo.x - h0x, box.hi.x + h0x, h0x, rx, growth);
  g->ys = graded_axis(box.lo.y - h0y, box.hi.y + h0y, h0y, ry, growth);
  g->nx = static_cast<int>(g->xs.size());
  g->ny = static_cast<int>(g->ys.size());
  g->uniform = refinements.empty();
  g->hx = g->uniform ? h0x : 0.0;
  g->hy = g->uniform ? h0y : 0.0;
  fill_mask(*g);
  return g;
}

GridPtr coarsen_grid(const Grid& grid) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < grid.nx; i += 2) xs.push_back(grid.xs[i]);
  for (int j = 0; j < grid.ny; j += 2) ys.push_back(grid.ys[j]);
  if (xs.back() != grid.xs.back()) xs.push_back(grid.xs.back());
  if (ys.back() != grid.ys.back()) ys.push_back(grid.ys.back());
  return grid_from_coordinates(grid.shape, std::move(xs), std::move(ys));
}

GridPtr grid_from_coordinates(const DomainShape& shape, std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 3 || ys.size() < 3) throw Error(ErrorKind::InvalidArgument, "grid too small");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw Error(ErrorKind::InvalidArgument, "x lines must increase");
  for (std::size_t j = 1; j < ys.size(); ++j)
    if (!(ys[j] > ys[j - 1])) throw Error(ErrorKind::InvalidArgument, "y lines must increase");
  auto g = std::make_shared<Grid>(shape);
  g->xs = std::move(xs);
  g->ys = std::move(ys);
  g->nx = static_cast<int>(g->xs.size());
  g->ny = static_cast<int>(g->ys.size());
  g->uniform = false;
  fill_mask(*g);
  // Check the lines are equispaced; if so record the spacings.
  auto equispaced = [](const std::vector<double>& v, double& h) {
    h = (v.back() - v.front()) / (v.size() - 1);
    for (std::size_t i = 1; i < v.size(); ++i)
      if (std::abs(v[i] - v[i - 1] - h) > 1e-9 * h) return false;
    return true;
  };
  double hx = 0.0;
  double hy = 0.0;
  if (equispaced(g->xs, hx) && equispaced(g->ys, hy)) {
    g->uniform = true;
    g->hx = hx;
    g->hy = hy;
  }
  return g;
}

double GridField::sample(Vec2 p) const {
  const Grid& g = *grid;
  if (p.x < g.xs.front() || p.x > g.xs.back() || p.y < g.ys.front() || p.y > g.ys.back()) return 0.0;
  const int i = g.cell_x(p.x);
  const int j = g.cell_y(p.y);
  const double tx = (p.x - g.xs[i]) / (g.xs[i + 1] - g.xs[i]);
  const double ty = (p.y - g.ys[j]) / (g.ys[j + 1] - g.ys[j]);
  return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
         tx * ty * at(i + 1, j + 1);
}

double GridField::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace vortexlab
