#include "vortexlab/green.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <map>
#include <type_traits>

namespace vortexlab {

namespace {

constexpr double kInvTwoPi = 1.0 / kTwoPi;

// Cubic B-spline quasi-interpolant along one axis: six node weights (nodes base .. base + 5) for
// the value and the derivative at `coord`.
void axis_weights(double coord, double origin, double h, int& base, std::array<double, 6>& w,
                  std::array<double, 6>& dw) {
  const double f = (coord - origin) / h;
  const int i = static_cast<int>(std::floor(f));
  const double t = f - i;
  base = i - 2;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double s = 1.0 - t;
  const std::array<double, 4> b{s * s * s / 6.0, (3 * t3 - 6 * t2 + 4) / 6.0, (-3 * t3 + 3 * t2 + 3 * t + 1) / 6.0,
                                t3 / 6.0};
  const std::array<double, 4> db{-s * s / 2.0, (9 * t2 - 12 * t) / 6.0, (-9 * t2 + 6 * t + 3) / 6.0, t2 / 2.0};
  w.fill(0.0);
  dw.fill(0.0);
  for (int m = 0; m < 4; ++m) {
    // Spline coefficient m+1 (node offset) is (-f[m] + 8 f[m+1] - f[m+2]) / 6.
    w[m] -= b[m] / 6.0;
    w[m + 1] += b[m] * 8.0 / 6.0;
    w[m + 2] -= b[m] / 6.0;
    dw[m] -= db[m] / (6.0 * h);
    dw[m + 1] += db[m] * 8.0 / (6.0 * h);
    dw[m + 2] -= db[m] / (6.0 * h);
  }
}

// Lagrange weights for evaluating at 0 the polynomial through the given abscissae.
std::vector<double> lagrange_at_zero(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 1.0);
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = 0; b < t.size(); ++b)
      if (a != b) w[a] *= (0.0 - t[b]) / (t[a] - t[b]);
  return w;
}

void add_scaled(std::map<int, double>& acc, const std::vector<std::pair<int, double>>& c, double s) {
  for (const auto& [k, v] : c) acc[k] += s * v;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

void GreenEvaluator::require_inside(Vec2 x) const {
  if (!shape_.contains(x)) throw Error(ErrorKind::OutsideDomain, "evaluation point is not inside the domain");
}

double GreenEvaluator::green(Vec2 x, Vec2 y) const {
  require_inside(x);
  require_inside(y);
  const double r = norm(x - y);
  if (r < 1e-8) throw Error(ErrorKind::CoincidentPoints, "G is singular on the diagonal");
  return -kInvTwoPi * std::log(r) + regular_part(x, y);
}

Vec2 GreenEvaluator::grad_x_green(Vec2 x, Vec2 y) const {
  require_inside(x);
  require_inside(y);
  const Vec2 d = x - y;
  const double r2 = norm2(d);
  if (r2 < 1e-16) throw Error(ErrorKind::CoincidentPoints, "grad G is singular on the diagonal");
  return -kInvTwoPi / r2 * d + grad_x_regular(x, y);
}

double GreenEvaluator::robin(Vec2 x) const {
  require_inside(x);
  return regular_part(x, x);
}

Vec2 GreenEvaluator::grad_robin(Vec2 x) const {
  require_inside(x);
  return 2.0 * grad_x_regular(x, x);
}

std::function<double(Vec2)> GreenEvaluator::regular_part_source(Vec2 y) const {
  return [this, y](Vec2 x) { return regular_part(x, y); };
}

// ---------------------------------------------------------------------------------------------

DiskGreen::DiskGreen(const DomainShape& disk) : GreenEvaluator(disk) {
  const auto* d = std::get_if<Disk>(&disk.kind());
  if (!d) throw Error(ErrorKind::InvalidArgument, "closed-form Green's function needs a disk");
  c_ = d->center;
  r_ = d->radius;
}

// H(x, y) = (1/4pi) log((|X|^2 |Y|^2 - 2 R^2 X.Y + R^4) / R^2), X = x - c, Y = y - c.
double DiskGreen::regular_part(Vec2 x, Vec2 y) const {
  const Vec2 X = x - c_;
  const Vec2 Y = y - c_;
  const double r2 = r_ * r_;
  const double q = norm2(X) * norm2(Y) - 2.0 * r2 * dot(X, Y) + r2 * r2;
  return 0.5 * kInvTwoPi * std::log(q / r2);
}

Vec2 DiskGreen::grad_x_regular(Vec2 x, Vec2 y) const {
  const Vec2 X = x - c_;
  const Vec2 Y = y - c_;
  const double r2 = r_ * r_;
  const double q = norm2(X) * norm2(Y) - 2.0 * r2 * dot(X, Y) + r2 * r2;
  return (0.5 * kInvTwoPi / q) * (2.0 * norm2(Y) * X - 2.0 * r2 * Y);
}

Vec2 DiskGreen::grad_robin(Vec2 x) const {
  require_inside(x);
  const Vec2 X = x - c_;
  return X * (-1.0 / (kPi * (r_ * r_ - norm2(X))));
}

double DiskGreen::normal_derivative_green(Vec2 x0, double theta) const {
  require_inside(x0);
  const Vec2 y = c_ + r_ * Vec2{std::cos(theta), std::sin(theta)};
  return -(r_ * r_ - norm2(x0 - c_)) / (kTwoPi * r_ * norm2(x0 - y));
}

// ---------------------------------------------------------------------------------------------

NumericGreen::NumericGreen(const DomainShape& shape, NumericGreenOptions options)
    : GreenEvaluator(shape), options_(options) {
  if (options_.n < 17) throw Error(ErrorKind::InvalidArgument, "numeric Green grid needs n >= 17");
  if (options_.cache_capacity == 0) options_.cache_capacity = 1;
  op_ = assemble(make_grid(shape, options_.n, 6));
  fd_step_ = 1e-5 * shape.diameter();
  tube_ = shape.tube_width();
  build_ghosts();
  disk_cache_ = options_.cache_dir;
  if (disk_cache_.empty())
    if (const char* env = std::getenv("VORTEXLAB_CACHE_DIR")) disk_cache_ = env;
  if (!disk_cache_.empty()) {
    // FNV-1a over everything the weights depend on.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xff;
        h *= 1099511628211ull;
      }
    };
    mix(static_cast<std::uint64_t>(shape.kind().index()));
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          mix(std::bit_cast<std::uint64_t>(k.center.x));
          mix(std::bit_cast<std::uint64_t>(k.center.y));
          if constexpr (std::is_same_v<K, Disk>) mix(std::bit_cast<std::uint64_t>(k.radius));
          if constexpr (std::is_same_v<K, Ellipse>) {
            mix(std::bit_cast<std::uint64_t>(k.a));
            mix(std::bit_cast<std::uint64_t>(k.b));
          }
          if constexpr (std::is_same_v<K, Star>) {
            for (double c : k.cos_coeffs) mix(std::bit_cast<std::uint64_t>(c));
            mix(0xffffffffffffffffull);
            for (double c : k.sin_coeffs) mix(std::bit_cast<std::uint64_t>(c));
          }
        },
        shape.kind());
    mix(static_cast<std::uint64_t>(options_.n));
    mix(options_.boundary_subtraction ? 1 : 0);
    signature_ = h;
  }
}

std::string NumericGreen::cache_path(const Entry& key) const {
  char name[96];
  std::snprintf(name, sizeof name, "green_%016llx_%016llx_%016llx.bin", static_cast<unsigned long long>(signature_),
                static_cast<unsigned long long>(key.first), static_cast<unsigned long long>(key.second));
  return (std::filesystem::path(disk_cache_) / name).string();
}

std::shared_ptr<const NumericGreen::Weights> NumericGreen::load_weights(const Entry& key) const {
  std::ifstream in(cache_path(key), std::ios::binary);
  if (!in) return nullptr;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  const auto links = static_cast<std::uint64_t>(op_->links().size());
  if (!in || count != links) return nullptr;
  auto w = std::make_shared<Weights>();
  for (Eigen::VectorXd* v : {&w->value, &w->dx, &w->dy}) {
    v->resize(static_cast<Eigen::Index>(links));
    in.read(reinterpret_cast<char*>(v->data()), static_cast<std::streamsize>(links * sizeof(double)));
  }
  if (!in) return nullptr;
  return w;
}

// Best effort: a failed write only costs a recomputation later.
void NumericGreen::store_weights(const Entry& key, const Weights& w) const {
  std::error_code ec;
  std::filesystem::create_directories(disk_cache_, ec);
  const std::string path = cache_path(key);
  const std::string tmp = path + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    const auto count = static_cast<std::uint64_t>(w.value.size());
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (const Eigen::VectorXd* v : {&w.value, &w.dx, &w.dy})
      out.write(reinterpret_cast<const char*>(v->data()), static_cast<std::streamsize>(v->size() * sizeof(double)));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp, ec);
      return;
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

// Ghost values outside the domain, extrapolated layer by layer along grid lines from the
// interior values and the boundary data, so the spline stencil of any interior point is defined.
void NumericGreen::build_ghosts() {
  const Grid& g = op_->grid();
  const int nu = op_->unknowns();
  node_combo_.assign(g.size(), {});
  node_known_.assign(g.size(), 0);
  for (int k = 0; k < nu; ++k) {
    node_combo_[op_->node(k)] = {{k, 1.0}};
    node_known_[op_->node(k)] = 1;
  }
  std::vector<std::array<int, 4>> link_of(nu, std::array<int, 4>{-1, -1, -1, -1});
  for (std::size_t l = 0; l < op_->links().size(); ++l) {
    const auto& lk = op_->links()[l];
    link_of[lk.unknown][lk.direction] = static_cast<int>(l);
  }
  constexpr int di[4] = {1, -1, 0, 0};
  constexpr int dj[4] = {0, 0, 1, -1};
  constexpr int opposite[4] = {1, 0, 3, 2};
  auto in_range = [&](int i, int j) { return i >= 0 && j >= 0 && i < g.nx && j < g.ny; };
  auto axis_dist = [&](int i, int j, int i2, int j2) {
    return std::abs(g.xs[i2] - g.xs[i]) + std::abs(g.ys[j2] - g.ys[j]);
  };

  // First layer: exterior nodes with an interior neighbour along a grid line.
  std::vector<std::pair<std::size_t, std::map<int, double>>> layer;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.inside(i, j)) continue;
      std::map<int, double> acc;
      int used = 0;
      for (int d = 0; d < 4; ++d) {
        const int i1 = i + di[d], j1 = j + dj[d];
        if (!in_range(i1, j1) || !g.inside(i1, j1)) continue;
        const int k1 = op_->unknown(g.index(i1, j1));
        const int l = link_of[k1][opposite[d]];
        if (l < 0) continue;
        const double len1 = axis_dist(i, j, i1, j1);
        const double ts = len1 * (1.0 - op_->links()[l].fraction);
        std::vector<double> t{ts};
        std::vector<int> ids{nu + l};
        auto push = [&](int steps) {
          const int ii = i + steps * di[d], jj = j + steps * dj[d];
          if (!in_range(ii, jj) || !g.inside(ii, jj)) return false;
          t.push_back(axis_dist(i, j, ii, jj));
          ids.push_back(op_->unknown(g.index(ii, jj)));
          return true;
        };
        if (op_->links()[l].fraction >= 0.3) {
          push(1);
          push(2);
        } else if (!(push(2) && push(3))) {
          t.resize(1);
          ids.resize(1);
          push(1);
        }
        const auto w = lagrange_at_zero(t);
        for (std::size_t a = 0; a < w.size(); ++a) acc[ids[a]] += w[a];
        ++used;
      }
      if (used == 0) continue;
      for (auto& [k, v] : acc) v /= used;
      layer.emplace_back(g.index(i, j), std::move(acc));
    }
  }
  auto commit = [&] {
    for (auto& [node, acc] : layer) {
      SparseCombo c;
      for (const auto& [k, v] : acc)
        if (v != 0.0) c.emplace_back(k, v);
      node_combo_[node] = std::move(c);
      node_known_[node] = 1;
    }
    layer.clear();
  };
  commit();

  // Further layers: polynomial extrapolation from known nodes on the same grid line.
  for (int pass = 0; pass < 5; ++pass) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (node_known_[g.index(i, j)]) continue;
        std::map<int, double> quad;
        std::map<int, double> lin;
        int nquad = 0, nlin = 0;
        for (int d = 0; d < 4; ++d) {
          std::vector<double> t;
          std::vector<std::size_t> nodes;
          for (int s = 1; s <= 3; ++s) {
            const int ii = i + s * di[d], jj = j + s * dj[d];
            if (!in_range(ii, jj) || !node_known_[g.index(ii, jj)]) break;
            t.push_back(axis_dist(i, j, ii, jj));
            nodes.push_back(g.index(ii, jj));
          }
          if (t.size() < 2) continue;
          const auto w = lagrange_at_zero(t);
          auto& acc = t.size() == 3 ? quad : lin;
          for (std::size_t a = 0; a < w.size(); ++a) add_scaled(acc, node_combo_[nodes[a]], w[a]);
          (t.size() == 3 ? nquad : nlin) += 1;
        }
        if (nquad > 0) {
          for (auto& [k, v] : quad) v /= nquad;
          layer.emplace_back(g.index(i, j), std::move(quad));
        } else if (nlin > 0) {
          for (auto& [k, v] : lin) v /= nlin;
          layer.emplace_back(g.index(i, j), std::move(lin));
        }
      }
    }
    commit();
  }
}

void NumericGreen::spline_functionals(Vec2 x, Eigen::MatrixXd& on_unknowns, Eigen::MatrixXd& on_links) const {
  const Grid& g = op_->grid();
  const int nu = op_->unknowns();
  on_unknowns.setZero(nu, 3);
  on_links.setZero(static_cast<Eigen::Index>(op_->links().size()), 3);
  int bx = 0, by = 0;
  std::array<double, 6> wx{}, dwx{}, wy{}, dwy{};
  axis_weights(x.x, g.xs[0], g.hx, bx, wx, dwx);
  axis_weights(x.y, g.ys[0], g.hy, by, wy, dwy);
  for (int b = 0; b < 6; ++b) {
    for (int a = 0; a < 6; ++a) {
      const int i = bx + a, j = by + b;
      if (i < 0 || j < 0 || i >= g.nx || j >= g.ny || !node_known_[g.index(i, j)])
        throw Error(ErrorKind::OutsideDomain, "spline stencil leaves the extrapolated region");
      const double w[3] = {wx[a] * wy[b], dwx[a] * wy[b], wx[a] * dwy[b]};
      for (const auto& [k, v] : node_combo_[g.index(i, j)]) {
        for (int c = 0; c < 3; ++c) {
          if (k < nu) on_unknowns(k, c) += w[c] * v;
          else on_links(k - nu, c) += w[c] * v;
        }
      }
    }
  }
}

std::shared_ptr<const NumericGreen::Weights> NumericGreen::weights(Vec2 x) const {
  const Entry key{std::bit_cast<std::uint64_t>(x.x), std::bit_cast<std::uint64_t>(x.y)};
  {
    std::lock_guard lock(cache_mutex_);
    auto it = index_.find(key);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
  }
  std::shared_ptr<const Weights> w = disk_cache_.empty() ? nullptr : load_weights(key);
  if (!w) {
    Eigen::MatrixXd on_u, on_l;
    spline_functionals(x, on_u, on_l);
    const Eigen::MatrixXd z = op_->solve_matrix(on_u);
    const auto& links = op_->links();
    for (std::size_t l = 0; l < links.size(); ++l)
      on_l.row(static_cast<Eigen::Index>(l)) += links[l].coeff * z.row(links[l].unknown);
    auto fresh = std::make_shared<Weights>();
    fresh->value = on_l.col(0);
    fresh->dx = on_l.col(1);
    fresh->dy = on_l.col(2);
    if (!disk_cache_.empty()) store_weights(key, *fresh);
    w = std::move(fresh);
  }

  std::lock_guard lock(cache_mutex_);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second->second;  // computed concurrently; identical values
  lru_.emplace_front(key, w);
  index_[key] = lru_.begin();
  while (lru_.size() > options_.cache_capacity) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return w;
}

std::size_t NumericGreen::cache_size() const {
  std::lock_guard lock(cache_mutex_);
  return lru_.size();
}

NumericGreen::Image NumericGreen::image(Vec2 y) const {
  Image im;
  if (!options_.boundary_subtraction) return im;
  const BoundaryData bd = shape().nearest_boundary(y);
  if (bd.distance >= tube_) return im;
  const double s = std::clamp((bd.distance - 0.5 * tube_) / (0.5 * tube_), 0.0, 1.0);
  im.chi = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  if (bd.curvature > 1e-9 && 1.0 / bd.curvature > bd.distance) {
    const double r = 1.0 / bd.curvature;
    const Vec2 c = bd.projection - r * bd.normal;
    const Vec2 yc = y - c;
    im.circle = true;
    im.star = c + (r * r / norm2(yc)) * yc;
    im.offset = std::log(norm(yc) / r);
  } else {
    im.star = bd.reflection;
  }
  if (shape().contains(im.star)) im.chi = 0.0;
  return im;
}

double NumericGreen::image_value(const Image& im, Vec2 x) {
  return kInvTwoPi * (std::log(norm(x - im.star)) + im.offset);
}

double NumericGreen::data(const Image& im, std::size_t link, Vec2 y) const {
  const Vec2 s = op_->links()[link].point;
  double v = kInvTwoPi * std::log(norm(s - y));
  if (im.chi > 0.0) v -= im.chi * image_value(im, s);
  return v;
}

double NumericGreen::regular_part_hat(Vec2 x, Vec2 y) const {
  const auto w = weights(x);
  const Image im = image(y);
  double v = im.chi > 0.0 ? im.chi * image_value(im, x) : 0.0;
  const std::size_t nl = op_->links().size();
  for (std::size_t l = 0; l < nl; ++l) v += w->value[static_cast<Eigen::Index>(l)] * data(im, l, y);
  return v;
}

Vec2 NumericGreen::grad_first_hat(Vec2 x, Vec2 y) const {
  const auto w = weights(x);
  const Image im = image(y);
  Vec2 g;
  if (im.chi > 0.0) g = (im.chi * kInvTwoPi / norm2(x - im.star)) * (x - im.star);
  const std::size_t nl = op_->links().size();
  for (std::size_t l = 0; l < nl; ++l) {
    const double d = data(im, l, y);
    g.x += w->dx[static_cast<Eigen::Index>(l)] * d;
    g.y += w->dy[static_cast<Eigen::Index>(l)] * d;
  }
  return g;
}

// Image contribution chi(y) [S(x, y) - sum_k mu_k(x) S(s_k, y)].
double NumericGreen::subtraction_part(const Weights& w, Vec2 x, Vec2 y) const {
  const Image im = image(y);
  if (im.chi == 0.0) return 0.0;
  double v = image_value(im, x);
  const auto& links = op_->links();
  for (std::size_t l = 0; l < links.size(); ++l)
    v -= w.value[static_cast<Eigen::Index>(l)] * image_value(im, links[l].point);
  return im.chi * v;
}

Vec2 NumericGreen::grad_second_hat(Vec2 x, Vec2 y) const {
  const auto w = weights(x);
  Vec2 g;
  const auto& links = op_->links();
  for (std::size_t l = 0; l < links.size(); ++l) {
    const Vec2 d = y - links[l].point;
    g += (w->value[static_cast<Eigen::Index>(l)] * kInvTwoPi / norm2(d)) * d;
  }
  if (options_.boundary_subtraction && shape().distance_to_boundary(y) < tube_ + 2.0 * fd_step_) {
    const double h = fd_step_;
    for (int axis = 0; axis < 2; ++axis) {
      const Vec2 e = axis == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
      for (const Vec2 p : {y + 2.0 * e, y - 2.0 * e})
        if (!shape().contains(p)) throw Error(ErrorKind::TooCloseToBoundary, "point within the FD stencil of the boundary");
      const double d = (-subtraction_part(*w, x, y + 2.0 * e) + 8.0 * subtraction_part(*w, x, y + e) -
                        8.0 * subtraction_part(*w, x, y - e) + subtraction_part(*w, x, y - 2.0 * e)) /
                       (12.0 * h);
      (axis == 0 ? g.x : g.y) += d;
    }
  }
  return g;
}

double NumericGreen::regular_part(Vec2 x, Vec2 y) const {
  require_inside(x);
  require_inside(y);
  if (x == y) return regular_part_hat(x, x);
  return 0.5 * (regular_part_hat(x, y) + regular_part_hat(y, x));
}

Vec2 NumericGreen::grad_x_regular(Vec2 x, Vec2 y) const {
  require_inside(x);
  require_inside(y);
  return 0.5 * (grad_first_hat(x, y) + grad_second_hat(y, x));
}

double NumericGreen::normal_derivative_green(Vec2 x0, double theta) const {
  require_inside(x0);
  const Vec2 y0 = shape().point(theta);
  const Vec2 nu = shape().normal(theta);
  const double eps = 1e-4 * shape().diameter();
  auto g = [&](double t) {
    const Vec2 y = y0 - t * nu;
    return -kInvTwoPi * std::log(norm(x0 - y)) + regular_part_hat(x0, y);
  };
  // One-sided second-order stencil; G vanishes on the boundary.
  return -(4.0 * g(eps) - g(2.0 * eps)) / (2.0 * eps);
}

std::function<double(Vec2)> NumericGreen::regular_part_source(Vec2 y) const {
  require_inside(y);
  const Image im = image(y);
  const std::size_t nl = op_->links().size();
  Eigen::VectorXd gl(static_cast<Eigen::Index>(nl));
  for (std::size_t l = 0; l < nl; ++l) gl[static_cast<Eigen::Index>(l)] = data(im, l, y);
  const Eigen::VectorXd u = op_->solve_matrix(op_->boundary_rhs(gl));
  const Grid& g = op_->grid();
  const int nu = op_->unknowns();
  auto nodes = std::make_shared<std::vector<double>>(g.size(), 0.0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!node_known_[n]) continue;
    double v = 0.0;
    for (const auto& [k, c] : node_combo_[n]) v += c * (k < nu ? u[k] : gl[k - nu]);
    (*nodes)[n] = v;
  }
  return [this, im, nodes](Vec2 x) {
    const Grid& g = op_->grid();
    int bx = 0, by = 0;
    std::array<double, 6> wx{}, dwx{}, wy{}, dwy{};
    axis_weights(x.x, g.xs[0], g.hx, bx, wx, dwx);
    axis_weights(x.y, g.ys[0], g.hy, by, wy, dwy);
    double v = im.chi > 0.0 ? im.chi * image_value(im, x) : 0.0;
    for (int b = 0; b < 6; ++b)
      for (int a = 0; a < 6; ++a) {
        const int i = bx + a, j = by + b;
        if (i < 0 || j < 0 || i >= g.nx || j >= g.ny || !node_known_[g.index(i, j)])
          throw Error(ErrorKind::OutsideDomain, "spline stencil leaves the extrapolated region");
        v += wx[a] * wy[b] * (*nodes)[g.index(i, j)];
      }
    return v;
  };
}

GreenPtr make_green(const DomainShape& shape, const GreenOptions& options) {
  using M = GreenOptions::Method;
  if (options.method == M::ClosedForm || (options.method == M::Auto && shape.is_disk()))
    return std::make_shared<DiskGreen>(shape);
  return std::make_shared<NumericGreen>(shape, options.numeric);
}

}  // namespace vortexlab
