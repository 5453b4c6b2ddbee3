#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "vortexlab/hamiltonian.hpp"

using namespace vortexlab;
using Catch::Approx;

namespace {

const DomainShape kDisk = DomainShape::disk({0, 0}, 1.0);

// Method of images on the unit disk.
double images_green(Vec2 x, Vec2 y) {
  double ny = norm(y);
  if (ny == 0.0) return -std::log(norm(x)) / kTwoPi;
  Vec2 ys = y / norm2(y);
  return std::log(norm(x - ys) * ny / norm(x - y)) / kTwoPi;
}

std::vector<Vec2> random_points(const DomainShape& s, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto box = s.bounding_box();
  std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y);
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < count) {
    Vec2 p{ux(rng), uy(rng)};
    if (s.contains(p) && s.distance_to_boundary(p) > 0.1 * s.inradius()) pts.push_back(p);
  }
  return pts;
}

const NumericGreen& ellipse_green() {
  static NumericGreen g(DomainShape::ellipse({0, 0}, 1.5, 1.0), {129, true, 64, ""});
  return g;
}

}  // namespace

TEST_CASE("disk closed form values", "[green]") {
  DiskGreen e(kDisk);
  CHECK(e.green({0.5, 0}, {-0.5, 0}) == Approx(std::log(1.25) / kTwoPi).epsilon(1e-13));
  CHECK(e.green({0, 0}, {0.3, 0}) == Approx(std::log(1 / 0.3) / kTwoPi).epsilon(1e-13));
  CHECK(e.regular_part({0, 0}, {0.4, -0.2}) == Approx(0.0).margin(1e-14));
  CHECK(e.regular_part({0.6, 0}, {0.6, 0}) == Approx(std::log(0.64) / kTwoPi).epsilon(1e-13));
  CHECK(e.robin({0, 0}) == Approx(0.0).margin(1e-14));
  CHECK(e.robin({0, 0.999}) < e.robin({0, 0.99}));
  for (Vec2 x : random_points(kDisk, 10, 3))
    CHECK(std::abs(e.robin(x) - std::log(1 - norm2(x)) / kTwoPi) <= 1e-12);
}

TEST_CASE("disk Robin function near the boundary", "[green]") {
  DiskGreen e(kDisk);
  double prev = 1e9;
  for (double d : {1e-1, 1e-2, 1e-3}) {
    double approx = (std::log(2 * d) - 0.5 * d) / kTwoPi;
    double rel = std::abs(e.robin({1 - d, 0}) - approx) / d;
    CHECK(rel < prev);
    prev = rel;
  }
}

TEST_CASE("disk gradients", "[green]") {
  DiskGreen e(kDisk);
  CHECK(norm(e.grad_robin({0, 0})) <= 1e-15);
  Vec2 g = e.grad_robin({0.5, 0});
  CHECK(g.x == Approx(-0.212207).epsilon(1e-5));
  CHECK(g.y == Approx(0.0).margin(1e-15));

  // 4th-order differences of h against the closed form.
  const double s = 1e-3;
  for (Vec2 x : random_points(kDisk, 10, 5)) {
    auto d = [&](Vec2 u) {
      return (-e.robin(x + 2 * s * u) + 8 * e.robin(x + s * u) - 8 * e.robin(x - s * u) + e.robin(x - 2 * s * u)) / (12 * s);
    };
    Vec2 fd{d({1, 0}), d({0, 1})};
    CHECK(norm(fd - e.grad_robin(x)) <= 1e-6 * norm(e.grad_robin(x)) + 1e-12);
  }

  // grad_x G against differences of the images formula.
  Vec2 x{0.2, 0}, y{-0.2, 0};
  auto gx = e.grad_x_green(x, y);
  double fx = (images_green(x + Vec2{1e-6, 0}, y) - images_green(x - Vec2{1e-6, 0}, y)) / 2e-6;
  double fy = (images_green(x + Vec2{0, 1e-6}, y) - images_green(x - Vec2{0, 1e-6}, y)) / 2e-6;
  CHECK(gx.x == Approx(fx).epsilon(1e-7));
  CHECK(gx.y == Approx(fy).margin(1e-9));
}

TEST_CASE("disk normal derivative", "[green]") {
  DiskGreen e(kDisk);
  for (double th : {0.0, 1.0, 2.5, 4.0}) CHECK(e.normal_derivative_green({0, 0}, th) == Approx(-1 / kTwoPi).epsilon(1e-12));
  // dG/dnu(x0, .) is minus the Poisson kernel: most negative at the nearest boundary point,
  // smallest in magnitude at the farthest one.
  double lo = 1e9, hi = -1e9, arg_lo = 0, arg_hi = 0;
  for (int k = 0; k < 3600; ++k) {
    double th = kTwoPi * k / 3600;
    double v = e.normal_derivative_green({0.3, 0}, th);
    CHECK(v < 0);
    CHECK(v == Approx(-(1 - 0.09) / (kTwoPi * norm2(kDisk.point(th) - Vec2{0.3, 0}))).epsilon(1e-12));
    if (v < lo) lo = v, arg_lo = th;
    if (v > hi) hi = v, arg_hi = th;
  }
  CHECK(arg_lo == Approx(0.0).margin(2e-3));
  CHECK(arg_hi == Approx(kPi).margin(2e-3));
  auto scan = minimize_normal_derivative(e, {0.3, 0});
  REQUIRE(scan.minimizers.size() == 1);
  CHECK(angular_gap(scan.minimizers[0], {0.0}) <= 1e-6);
}

TEST_CASE("coincident and exterior points are rejected", "[green]") {
  DiskGreen e(kDisk);
  try {
    e.green({0.1, 0.1}, {0.1, 0.1 + 1e-10});
    FAIL("expected CoincidentPoints");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::CoincidentPoints);
  }
  try {
    e.green({1.1, 0}, {0.1, 0});
    FAIL("expected OutsideDomain");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::OutsideDomain);
  }
}

TEST_CASE("Green symmetry and positivity", "[green][property]") {
  DiskGreen disk(kDisk);
  auto dp = random_points(kDisk, 40, 11);
  for (std::size_t k = 0; k + 1 < dp.size(); k += 2) {
    CHECK(std::abs(disk.green(dp[k], dp[k + 1]) - disk.green(dp[k + 1], dp[k])) <= 1e-14);
    CHECK(disk.green(dp[k], dp[k + 1]) > 0);
  }
  const auto& e = ellipse_green();
  auto ep = random_points(e.shape(), 40, 12);
  for (std::size_t k = 0; k + 1 < ep.size(); k += 2) {
    CHECK(std::abs(e.green(ep[k], ep[k + 1]) - e.green(ep[k + 1], ep[k])) <= 1e-6);
    CHECK(e.green(ep[k], ep[k + 1]) > 0);
  }
}

TEST_CASE("(x - y) . grad_x G < 0 on convex domains", "[green][property]") {
  DiskGreen disk(kDisk);
  const auto& ell = ellipse_green();
  for (const GreenEvaluator* e : {static_cast<const GreenEvaluator*>(&disk), static_cast<const GreenEvaluator*>(&ell)}) {
    auto pts = random_points(e->shape(), 100, 21);
    for (std::size_t k = 0; k + 1 < pts.size(); k += 2)
      CHECK(dot(pts[k] - pts[k + 1], e->grad_x_green(pts[k], pts[k + 1])) < 0);
  }
}

TEST_CASE("singular part dominates near the diagonal", "[green]") {
  const auto& e = ellipse_green();
  Vec2 x{0.2, 0.1}, y = x + Vec2{1e-3, 0};
  double lhs = norm(e.grad_x_green(x, y));
  CHECK(lhs >= 1 / (kTwoPi * 1e-3) - norm(e.grad_x_regular(x, y)));
}

TEST_CASE("numeric evaluator on the disk", "[green]") {
  NumericGreen e(kDisk, {129, true, 64, ""});
  DiskGreen exact(kDisk);
  double err = 0;
  auto pts = random_points(kDisk, 40, 7);
  for (std::size_t k = 0; k + 1 < pts.size(); k += 2)
    err = std::max(err, std::abs(e.regular_part(pts[k], pts[k + 1]) - exact.regular_part(pts[k], pts[k + 1])));
  CHECK(err <= 5e-3);
  for (double th : {0.3, 2.0}) CHECK(e.normal_derivative_green({0, 0}, th) == Approx(-1 / kTwoPi).epsilon(1e-2));
}

TEST_CASE("numeric cache reuse is bit-identical", "[green]") {
  NumericGreen e(kDisk, {65, true, 2, ""});
  Vec2 x{0.1, 0.2}, y{-0.3, 0.4};
  double first = e.regular_part(x, y);
  e.regular_part({0.5, 0.1}, y);
  e.regular_part({-0.2, -0.6}, y);  // evicts x
  CHECK(e.cache_size() <= 4);
  CHECK(e.regular_part(x, y) == first);
}
