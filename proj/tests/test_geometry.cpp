#include <catch_amalgamated.hpp>

#include <cmath>

#include "vortexlab/grid.hpp"

using namespace vortexlab;
using Catch::Approx;

namespace {
const DomainShape kDisk = DomainShape::disk({0, 0}, 1.0);
const DomainShape kEllipse = DomainShape::ellipse({0, 0}, 2.0, 1.0);
}  // namespace

TEST_CASE("contains", "[geometry]") {
  CHECK(kDisk.contains({0, 0}));
  CHECK_FALSE(kDisk.contains({1.5, 0}));
  CHECK(kEllipse.contains({1.9, 0}));
  CHECK_FALSE(kEllipse.contains({0, 1.01}));
}

TEST_CASE("boundary data on the disk is radial", "[geometry]") {
  auto b = boundary_data(kDisk, {0.9, 0});
  CHECK(b.distance == Approx(0.1).margin(1e-12));
  CHECK(b.projection.x == Approx(1.0).margin(1e-12));
  CHECK(b.projection.y == Approx(0.0).margin(1e-12));
  CHECK(b.normal.x == Approx(1.0).margin(1e-12));
  CHECK(b.curvature == Approx(1.0).epsilon(1e-10));
  CHECK(b.reflection.x == Approx(1.1).margin(1e-12));
}

TEST_CASE("ellipse curvature at the end of the minor axis", "[geometry]") {
  auto b = boundary_data(kEllipse, {0, 0.9});
  CHECK(b.projection.x == Approx(0.0).margin(1e-10));
  CHECK(b.projection.y == Approx(1.0).margin(1e-10));
  CHECK(b.curvature == Approx(0.25).epsilon(1e-10));
}

TEST_CASE("boundary data outside the tube", "[geometry]") {
  try {
    boundary_data(kDisk, {0, 0}, 0.2);
    FAIL("expected OutsideTube");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutsideTube);
  }
}

TEST_CASE("projection and reflection invariants", "[geometry][property]") {
  const auto star = DomainShape(Star{{0.1, -0.2}, {1.0, 0.0, 0.0, 0.05}, {0.0, 0.03}});
  for (const DomainShape* s : {&kDisk, &kEllipse, &star}) {
    double tube = s->tube_width();
    for (int k = 0; k < 40; ++k) {
      double th = 0.157 * k;
      Vec2 p = s->point(th);
      Vec2 x = p - (0.3 + 0.6 * (k % 5) / 5.0) * tube * s->normal(th);
      auto b = boundary_data(*s, x);
      CHECK(norm(b.projection + b.distance * (-b.normal) - x) <= 1e-10);
      CHECK(std::abs(norm(b.normal) - 1.0) <= 1e-12);
      CHECK_FALSE(s->contains(b.reflection));
    }
  }
  for (double r : {0.85, 0.9, 0.95, 0.99}) {
    auto b = boundary_data(kDisk, {r * std::cos(1.0), r * std::sin(1.0)});
    CHECK(std::abs(kDisk.distance_to_boundary(b.reflection) - b.distance) <= 1e-8);
  }
}

TEST_CASE("convexity certificate", "[geometry]") {
  CHECK(kDisk.is_convex());
  CHECK(kEllipse.is_convex());
  CHECK_FALSE(DomainShape(Star{{0, 0}, {1.0, 0.0, 0.0, 0.0, 0.3}, {}}).is_convex());
}

TEST_CASE("make_grid spacing and mask", "[geometry]") {
  auto g = make_grid(kDisk, 257);
  CHECK(g->hx == Approx(2.0 / 256).epsilon(1e-14));
  CHECK(g->hy == Approx(2.0 / 256).epsilon(1e-14));
  CHECK(g->interior_count() * g->hx * g->hy == Approx(kPi).epsilon(0.02));

  auto g33 = make_grid(kDisk, 33);
  int brute = 0;
  for (int j = 0; j < g33->ny; ++j)
    for (int i = 0; i < g33->nx; ++i)
      if (norm2(g33->node(i, j)) < 1.0) ++brute;
  CHECK(g33->interior_count() == brute);

  auto ge = make_grid(kEllipse, 129);
  bool all_inside = true, stencil_ok = true;
  for (int j = 0; j < ge->ny; ++j)
    for (int i = 0; i < ge->nx; ++i)
      if (ge->inside(i, j)) {
        all_inside = all_inside && kEllipse.contains(ge->node(i, j));
        stencil_ok = stencil_ok && i > 0 && j > 0 && i + 1 < ge->nx && j + 1 < ge->ny;
      }
  CHECK(all_inside);
  CHECK(stencil_ok);
}

TEST_CASE("graded grid resolves the refinement center", "[geometry]") {
  auto g = make_graded_grid(kDisk, 65, {{{0.3, -0.2}, 1e-3}}, 0.1);
  CHECK_FALSE(g->uniform);
  CHECK(g->local_spacing({0.3, -0.2}) <= 1.1e-3);
  auto c = coarsen_grid(*g);
  CHECK(c->nx <= g->nx / 2 + 1);
  CHECK(c->xs.front() == g->xs.front());
  CHECK(c->xs[1] == g->xs[2]);
}
