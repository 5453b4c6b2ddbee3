#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "vortexlab/hamiltonian.hpp"

using namespace vortexlab;
using Catch::Approx;

namespace {

const DomainShape kDisk = DomainShape::disk({0, 0}, 1.0);
const DomainShape kEllipse = DomainShape::ellipse({0, 0}, 1.5, 1.0);

const GreenEvaluator& ellipse_green() {
  static NumericGreen g(kEllipse, {129, true, 64, ""});
  return g;
}

VortexConfig random_config(const DomainShape& s, std::mt19937_64& rng, double gamma) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (;;) {
    VortexConfig c{{u(rng), u(rng)}, {u(rng), u(rng)}, gamma, 1.0};
    if (s.contains(c.xi1) && s.contains(c.xi2) && config_margin(s, c) > 0.15) return c;
  }
}

}  // namespace

TEST_CASE("Hamiltonian on the disk from images", "[hamiltonian]") {
  DiskGreen e(kDisk);
  VortexConfig c{{0.3, 0}, {-0.3, 0}, 1.0, 1.0};
  // Images: h(0.3) = log(0.91)/2pi, G = log(|x - y*| |y| / |x - y|)/2pi with y* = y/|y|^2.
  double h = std::log(0.91) / kTwoPi;
  double g = std::log((0.3 + 1 / 0.3) * 0.3 / 0.6) / kTwoPi;
  CHECK(e.robin(c.xi1) == Approx(h).epsilon(1e-12));
  CHECK(e.green(c.xi1, c.xi2) == Approx(g).epsilon(1e-12));
  CHECK(eval_hamiltonian(e, c) == Approx(2 * h - 2 * g).epsilon(1e-12));
  CHECK(eval_hamiltonian(e, c) == Approx(-0.22005).margin(2e-5));
  CHECK(eval_hamiltonian(e, {c.xi2, c.xi1, 1.0, 1.0}) == Approx(eval_hamiltonian(e, c)).epsilon(1e-14));
  double prev = 0;
  for (double s : {1e-1, 1e-3, 1e-6}) {
    double v = eval_hamiltonian(e, {c.xi1, c.xi1 + Vec2{s, 0}, 2.0, 1.0});
    if (s < 1e-1) CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < -1.0);
}

TEST_CASE("Kirchhoff-Routh consistency", "[hamiltonian][property]") {
  DiskGreen disk(kDisk);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    auto c = random_config(kDisk, rng, 0.5 + 0.05 * k);
    double kr = eval_kirchhoff_routh(disk, {c.xi1, c.xi2}, {1.0, -1.0 / c.gamma});
    CHECK(std::abs(kr - eval_hamiltonian(disk, c)) <= 1e-12 * (1 + std::abs(kr)));
  }
  Vec2 x{0.2, -0.1}, z{-0.4, 0.3};
  CHECK(eval_kirchhoff_routh(disk, {x}, {1.7}) == Approx(1.7 * 1.7 * disk.robin(x)).epsilon(1e-14));
  CHECK(eval_kirchhoff_routh(disk, {x, z}, {1.7, 0.0}) == Approx(eval_kirchhoff_routh(disk, {x}, {1.7})).epsilon(1e-14));
}

TEST_CASE("Hamiltonian gradient", "[hamiltonian]") {
  DiskGreen disk(kDisk);
  auto g = grad_hamiltonian(disk, {{0.4, 0}, {-0.4, 0}, 1.0, 1.0});
  CHECK(std::abs(g[1]) <= 1e-10);
  CHECK(std::abs(g[3]) <= 1e-10);

  std::mt19937_64 rng(9);
  const double s = 1e-5;
  for (const GreenEvaluator* e : {static_cast<const GreenEvaluator*>(&disk), &ellipse_green()}) {
    for (int k = 0; k < 10; ++k) {
      auto c = random_config(e->shape(), rng, 1.0 + 0.3 * k);
      Eigen::Vector4d z = config_vector(c), fd;
      for (int i = 0; i < 4; ++i) {
        Eigen::Vector4d zp = z, zm = z;
        zp[i] += s;
        zm[i] -= s;
        fd[i] = (eval_hamiltonian(*e, config_from_vector(zp, c.gamma, c.tau)) -
                 eval_hamiltonian(*e, config_from_vector(zm, c.gamma, c.tau))) / (2 * s);
      }
      CHECK((fd - grad_hamiltonian(*e, c)).norm() <= 1e-5 * fd.norm());
    }
  }
}

TEST_CASE("classification of synthetic quadratics", "[hamiltonian]") {
  Eigen::Vector4d d(-1, -2, -3, -4);
  auto grad = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return (d.asDiagonal() * z).eval(); };
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(4);
  CHECK(classify_hessian(fd_hessian(grad, z0, 1e-3)) == Classification::Maximum);
  d = Eigen::Vector4d(1, 2, 3, 4);
  CHECK(classify_hessian(fd_hessian(grad, z0, 1e-3)) == Classification::Minimum);
  d = Eigen::Vector4d(1, -2, 3, -4);
  CHECK(classify_hessian(fd_hessian(grad, z0, 1e-3)) == Classification::Saddle);
  d = Eigen::Vector4d(-1, -2, 1e-9, -4);
  CHECK(classify_hessian(fd_hessian(grad, z0, 1e-3)) == Classification::Degenerate);
}

TEST_CASE("disk critical point: gauge-fixed maximum, degenerate in full", "[hamiltonian]") {
  DiskGreen e(kDisk);
  SearchOptions opt;
  opt.starts = 16;
  auto found = find_critical_points(e, 1.0, 1.0, opt);
  REQUIRE_FALSE(found.empty());
  bool saw_max = false;
  for (const auto& cp : found) {
    CHECK(cp.gauge_fixed);
    CHECK(cp.grad_norm <= 1e-8 * (1 + std::abs(cp.value)));
    CHECK(cp.full_classification == Classification::Degenerate);
    CHECK(cp.eigenvalues.cwiseAbs().minCoeff() <= 1e-4);
    CHECK(cp.margin >= 0.05 * kDisk.inradius());
    if (cp.classification == Classification::Maximum) {
      saw_max = true;
      CHECK(cp.cfg.xi1.x == Approx(-cp.cfg.xi2.x).epsilon(1e-6));
    }
    VortexConfig swapped{cp.cfg.xi2, cp.cfg.xi1, 1.0, 1.0};
    CHECK(grad_hamiltonian(e, swapped).norm() <= 1e-8 * (1 + std::abs(cp.value)));
  }
  CHECK(saw_max);
}

TEST_CASE("ellipse critical point on the major axis", "[hamiltonian]") {
  const auto& e = ellipse_green();
  // 1-D oracle: t -> H((t, 0), (-t, 0)) at resolution 1e-4.
  // Coarse pass at 1e-2, then 1e-4 around the coarse maximum.
  auto scan = [&](double lo, double hi, double step) {
    double best = -1e9, arg = lo;
    for (double t = lo; t <= hi; t += step) {
      double v = eval_hamiltonian(e, {{t, 0}, {-t, 0}, 1.0, 1.0});
      if (v > best) best = v, arg = t;
    }
    return arg;
  };
  double coarse = scan(0.05, 1.4, 1e-2);
  double tstar = scan(coarse - 1e-2, coarse + 1e-2, 1e-4);
  SearchOptions opt;
  opt.starts = 24;
  auto found = find_critical_points(e, 1.0, 1.0, opt);
  bool match = false;
  for (const auto& cp : found) {
    CHECK(cp.grad_norm <= 1e-8 * (1 + std::abs(cp.value)));
    if (std::abs(cp.cfg.xi1.y) < 1e-6 && std::abs(cp.cfg.xi2.y) < 1e-6 &&
        std::abs(std::abs(cp.cfg.xi1.x) - tstar) <= 2e-4 && std::abs(cp.cfg.xi1.x + cp.cfg.xi2.x) <= 1e-6)
      match = true;
  }
  CHECK(match);
}

TEST_CASE("robin argmax on the disk and the ellipse", "[hamiltonian]") {
  DiskGreen disk(kDisk);
  CHECK(norm(robin_argmax(disk)) <= 1e-8);
  CHECK(norm(robin_argmax(ellipse_green())) <= 1e-3);
}

TEST_CASE("escaping point approaches the boundary along the branch", "[hamiltonian]") {
  const auto& e = ellipse_green();
  auto sweep = sweep_gamma(e, {1, 2, 4, 8, 16, 32}, 1.0, {{0, 0.3}, {0, -0.3}, 1.0, 1.0});
  REQUIRE_FALSE(sweep.branch_lost);
  REQUIRE(sweep.records.size() == 6);
  CHECK(sweep.records[5].dist_boundary < sweep.records[3].dist_boundary);
}
