#include "vortexlab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace vortexlab {

double config_margin(const DomainShape& shape, const VortexConfig& cfg) {
  return std::min({norm(cfg.xi1 - cfg.xi2), shape.distance_to_boundary(cfg.xi1),
                   shape.distance_to_boundary(cfg.xi2)});
}

void validate_config(const DomainShape& shape, const VortexConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw Error(ErrorKind::RangeError, "gamma must be positive");
  if (!(cfg.tau > 0.0)) throw Error(ErrorKind::RangeError, "tau must be positive");
  if (!shape.contains(cfg.xi1) || !shape.contains(cfg.xi2))
    throw Error(ErrorKind::OutsideDomain, "vortex outside the domain");
  if (norm(cfg.xi1 - cfg.xi2) < 1e-8) throw Error(ErrorKind::CoincidentPoints, "vortices coincide");
}

double eval_hamiltonian(const GreenEvaluator& e, const VortexConfig& cfg) {
  validate_config(e.shape(), cfg);
  const double g = cfg.gamma;
  return e.robin(cfg.xi1) + e.robin(cfg.xi2) / (g * g) - 2.0 * e.green(cfg.xi1, cfg.xi2) / g;
}

double eval_kirchhoff_routh(const GreenEvaluator& e, const std::vector<Vec2>& points,
                            const std::vector<double>& intensities) {
  if (points.size() != intensities.size())
    throw Error(ErrorKind::InvalidArgument, "points and intensities differ in length");
  double v = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (intensities[i] == 0.0) continue;
    v += intensities[i] * intensities[i] * e.robin(points[i]);
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (intensities[j] == 0.0) continue;
      v += 2.0 * intensities[i] * intensities[j] * e.green(points[i], points[j]);
    }
  }
  return v;
}

Eigen::Vector4d grad_hamiltonian(const GreenEvaluator& e, const VortexConfig& cfg) {
  validate_config(e.shape(), cfg);
  const double g = cfg.gamma;
  const Vec2 a = e.grad_robin(cfg.xi1) - (2.0 / g) * e.grad_x_green(cfg.xi1, cfg.xi2);
  const Vec2 b = e.grad_robin(cfg.xi2) / (g * g) - (2.0 / g) * e.grad_x_green(cfg.xi2, cfg.xi1);
  return {a.x, a.y, b.x, b.y};
}

Eigen::Vector4d config_vector(const VortexConfig& cfg) { return {cfg.xi1.x, cfg.xi1.y, cfg.xi2.x, cfg.xi2.y}; }

VortexConfig config_from_vector(const Eigen::Vector4d& z, double gamma, double tau) {
  return {{z[0], z[1]}, {z[2], z[3]}, gamma, tau};
}

Eigen::MatrixXd fd_hessian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                           const Eigen::VectorXd& z, double step) {
  const Eigen::Index n = z.size();
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd zp = z, zm = z;
    zp[k] += step;
    zm[k] -= step;
    h.col(k) = (grad(zp) - grad(zm)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

Eigen::Matrix4d hessian_hamiltonian(const GreenEvaluator& e, const VortexConfig& cfg, double step) {
  if (step <= 0.0) step = 1e-4 * e.shape().diameter();
  auto grad = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return grad_hamiltonian(e, config_from_vector(z, cfg.gamma, cfg.tau));
  };
  return fd_hessian(grad, config_vector(cfg), step);
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Maximum: return "max";
    case Classification::Minimum: return "min";
    case Classification::Saddle: return "saddle";
    case Classification::Degenerate: return "degenerate";
  }
  return "unknown";
}

Classification classify_eigenvalues(const Eigen::VectorXd& ev, double rel_zero) {
  const double scale = ev.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return Classification::Degenerate;
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= rel_zero * scale) return Classification::Degenerate;
    (ev[i] > 0.0 ? pos : neg) += 1;
  }
  if (pos == 0) return Classification::Maximum;
  if (neg == 0) return Classification::Minimum;
  return Classification::Saddle;
}

Classification classify_hessian(const Eigen::MatrixXd& hessian, double rel_zero) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian, Eigen::EigenvaluesOnly);
  return classify_eigenvalues(es.eigenvalues(), rel_zero);
}

namespace {

bool use_gauge(const GreenEvaluator& e, const SearchOptions& o) {
  return o.gauge == 1 || (o.gauge == -1 && e.shape().is_disk());
}

// Rotate a configuration about the disk center so that xi1 lies on the ray center + (s, 0).
VortexConfig gauge_rotate(const VortexConfig& cfg, Vec2 c) {
  const Vec2 r = cfg.xi1 - c;
  const double a = std::atan2(r.y, r.x);
  const double ca = std::cos(-a), sa = std::sin(-a);
  auto rot = [&](Vec2 p) {
    const Vec2 q = p - c;
    return c + Vec2{ca * q.x - sa * q.y, sa * q.x + ca * q.y};
  };
  VortexConfig out = cfg;
  out.xi1 = {c.x + norm(r), c.y};
  out.xi2 = rot(cfg.xi2);
  return out;
}

// Zero-finding for the (barrier-augmented) gradient in full or gauge-fixed coordinates.
struct LocalProblem {
  const GreenEvaluator& e;
  double gamma;
  double tau;
  bool gauge;
  Vec2 center;
  double beta = 0.0;
  double min_margin;

  VortexConfig cfg(const Eigen::VectorXd& w) const {
    if (gauge) return {{center.x + w[0], center.y}, {w[1], w[2]}, gamma, tau};
    return {{w[0], w[1]}, {w[2], w[3]}, gamma, tau};
  }
  Eigen::VectorXd reduce(const VortexConfig& c) const {
    if (gauge) return Eigen::Vector3d{c.xi1.x - center.x, c.xi2.x, c.xi2.y};
    return config_vector(c);
  }
  double margin(const Eigen::VectorXd& w) const {
    const VortexConfig c = cfg(w);
    if (!e.shape().contains(c.xi1) || !e.shape().contains(c.xi2)) return -1.0;
    if (gauge && w[0] < 0.0) return -1.0;
    return config_margin(e.shape(), c);
  }
  bool feasible(const Eigen::VectorXd& w) const { return margin(w) > min_margin; }
  Eigen::VectorXd grad(const Eigen::VectorXd& w) const {
    const VortexConfig c = cfg(w);
    Eigen::Vector4d g = grad_hamiltonian(e, c);
    if (beta > 0.0) {
      const BoundaryData b1 = e.shape().nearest_boundary(c.xi1);
      const BoundaryData b2 = e.shape().nearest_boundary(c.xi2);
      const Vec2 d = c.xi1 - c.xi2;
      const Vec2 sep = d / norm2(d);
      const Vec2 g1 = -1.0 / b1.distance * b1.normal + sep;
      const Vec2 g2 = -1.0 / b2.distance * b2.normal - sep;
      g += beta * Eigen::Vector4d{g1.x, g1.y, g2.x, g2.y};
    }
    if (gauge) return Eigen::Vector3d{g[0], g[2], g[3]};
    return g;
  }
  double value(const Eigen::VectorXd& w) const { return eval_hamiltonian(e, cfg(w)); }
};

// Levenberg-Marquardt on grad = 0. Returns true when ||grad|| <= tol. The Jacobian is a
// finite-difference Hessian; with `broyden` it is refreshed only every few steps and otherwise
// updated by rank-one secant corrections.
bool lm_solve(const LocalProblem& p, Eigen::VectorXd& w, double tol, int max_iter, double fd_step,
              bool broyden = false) {
  Eigen::VectorXd g = p.grad(w);
  double gn = g.norm();
  double lambda = -1.0;
  int stalls = 0;
  int age = 1 << 20;
  Eigen::MatrixXd jac;
  for (int it = 0; it < max_iter && gn > tol; ++it) {
    const double m = p.margin(w);
    if (!broyden || age >= 6 || stalls > 0) {
      const double step = std::min(fd_step, 0.25 * (m - p.min_margin));
      try {
        jac = fd_hessian([&](const Eigen::VectorXd& z) { return p.grad(z); }, w, step);
      } catch (const Error&) {
        return false;
      }
      age = 0;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    if (lambda < 0.0) lambda = 1e-6 * jtj.diagonal().maxCoeff();
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      const Eigen::MatrixXd lhs = jtj + lambda * Eigen::MatrixXd::Identity(w.size(), w.size());
      Eigen::VectorXd dw = lhs.ldlt().solve(-jac.transpose() * g);
      const double cap = 0.25 * std::max(m, 0.0);
      if (dw.norm() > cap && cap > 0.0) dw *= cap / dw.norm();
      const Eigen::VectorXd wn = w + dw;
      if (dw.norm() < 1e-15 * (1.0 + w.norm())) break;
      if (p.feasible(wn)) {
        Eigen::VectorXd gnew;
        try {
          gnew = p.grad(wn);
        } catch (const Error&) {
          lambda *= 4.0;
          continue;
        }
        if (gnew.norm() < gn) {
          if (broyden) jac += ((gnew - g) - jac * dw) * dw.transpose() / dw.squaredNorm();
          w = wn;
          g = gnew;
          gn = g.norm();
          lambda = std::max(lambda / 8.0, 1e-18 * jtj.diagonal().maxCoeff());
          accepted = true;
          ++age;
          break;
        }
      }
      lambda *= 4.0;
      if (broyden && age > 0) break;  // refresh the Jacobian before shrinking further
    }
    if (accepted) {
      stalls = 0;
    } else if (++stalls > 2) {
      break;
    }
  }
  return gn <= tol;
}

// Van der Corput radical inverse for Halton sequences.
double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

void classify_critical_point(const GreenEvaluator& e, CriticalPoint& cp) {
  cp.value = eval_hamiltonian(e, cp.cfg);
  cp.grad_norm = grad_hamiltonian(e, cp.cfg).norm();
  cp.margin = config_margin(e.shape(), cp.cfg);
  const double step = std::min(1e-4 * e.shape().diameter(), 0.25 * cp.margin);
  cp.hessian = hessian_hamiltonian(e, cp.cfg, step);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cp.hessian, Eigen::EigenvaluesOnly);
  cp.eigenvalues = es.eigenvalues();
  cp.full_classification = classify_eigenvalues(cp.eigenvalues);
  if (cp.gauge_fixed) {
    Eigen::Matrix3d r;
    const int idx[3] = {0, 2, 3};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) r(a, b) = cp.hessian(idx[a], idx[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> rs(r, Eigen::EigenvaluesOnly);
    cp.restricted_eigenvalues = rs.eigenvalues();
    cp.classification = classify_eigenvalues(cp.restricted_eigenvalues);
  } else {
    cp.restricted_eigenvalues.resize(0);
    cp.classification = cp.full_classification;
  }
}

CriticalPoint refine_critical_point(const GreenEvaluator& e, const VortexConfig& start,
                                    const SearchOptions& options) {
  const DomainShape& shape = e.shape();
  const bool gauge = use_gauge(e, options);
  LocalProblem p{e, start.gamma, start.tau, gauge, shape.center(), 0.0, 5e-5 * shape.diameter()};
  VortexConfig s = gauge ? gauge_rotate(start, shape.center()) : start;
  Eigen::VectorXd w = p.reduce(s);
  if (!p.feasible(w)) throw Error(ErrorKind::OutsideDomain, "starting configuration is not admissible");
  const double fd = 1e-4 * shape.diameter();
  bool ok = false;
  for (int round = 0; round < 3 && !ok; ++round) {
    const double tol = options.tol_rel * 0.5 * (1.0 + std::abs(p.value(w)));
    ok = lm_solve(p, w, tol, options.max_iter, fd);
  }
  if (!ok) throw Error(ErrorKind::NoConvergence, "Newton on the gradient did not converge");
  CriticalPoint cp;
  cp.cfg = p.cfg(w);
  cp.gauge_fixed = gauge;
  classify_critical_point(e, cp);
  if (cp.grad_norm > options.tol_rel * (1.0 + std::abs(cp.value)))
    throw Error(ErrorKind::NoConvergence, "gradient tolerance not met");
  return cp;
}

std::vector<CriticalPoint> find_critical_points(const GreenEvaluator& e, double gamma, double tau,
                                                const SearchOptions& options) {
  if (!(gamma > 0.0) || !(tau > 0.0)) throw Error(ErrorKind::RangeError, "gamma and tau must be positive");
  const DomainShape& shape = e.shape();
  const double eta = options.eta > 0.0 ? options.eta : 0.05 * shape.inradius();
  const bool gauge = use_gauge(e, options);
  const BoundingBox box = shape.bounding_box();
  const double diam = shape.diameter();

  std::vector<VortexConfig> seeds;
  for (std::uint64_t i = 1 + options.seed * 9973u; seeds.size() < static_cast<std::size_t>(options.starts); ++i) {
    auto lerp = [](double lo, double hi, double t) { return lo + (hi - lo) * t; };
    VortexConfig c{{lerp(box.lo.x, box.hi.x, radical_inverse(i, 2)), lerp(box.lo.y, box.hi.y, radical_inverse(i, 3))},
                   {lerp(box.lo.x, box.hi.x, radical_inverse(i, 5)), lerp(box.lo.y, box.hi.y, radical_inverse(i, 7))},
                   gamma, tau};
    if (!shape.contains(c.xi1) || !shape.contains(c.xi2)) continue;
    if (config_margin(shape, c) < eta) continue;
    seeds.push_back(gauge ? gauge_rotate(c, shape.center()) : c);
    if (i > 1000000) break;
  }

  std::vector<CriticalPoint> found;
  const double fd = 1e-4 * diam;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    LocalProblem p{e, gamma, tau, gauge, shape.center(), 0.0, 0.5 * eta};
    Eigen::VectorXd w = p.reduce(seeds[s]);
    try {
      for (double beta : {1e-2, 1e-3, 1e-4}) {
        p.beta = beta;
        lm_solve(p, w, 1e-3 * beta, options.max_iter / 4, fd, true);
      }
      p.beta = 0.0;
      p.min_margin = 5e-5 * diam;
      bool ok = false;
      for (int round = 0; round < 3 && !ok; ++round)
        ok = lm_solve(p, w, options.tol_rel * 0.5 * (1.0 + std::abs(p.value(w))), options.max_iter, fd);
      if (!ok) continue;
    } catch (const Error&) {
      continue;
    }
    CriticalPoint cp;
    cp.cfg = p.cfg(w);
    cp.gauge_fixed = gauge;
    cp.seed = static_cast<int>(s);
    cp.value = eval_hamiltonian(e, cp.cfg);
    cp.grad_norm = grad_hamiltonian(e, cp.cfg).norm();
    cp.margin = config_margin(shape, cp.cfg);
    if (cp.grad_norm > options.tol_rel * (1.0 + std::abs(cp.value)) || cp.margin < eta) continue;
    const Eigen::Vector4d z = config_vector(cp.cfg);
    const bool dup = std::any_of(found.begin(), found.end(), [&](const CriticalPoint& f) {
      return (config_vector(f.cfg) - z).cwiseAbs().maxCoeff() < 1e-6 * diam;
    });
    if (dup) continue;
    classify_critical_point(e, cp);
    found.push_back(cp);
  }
  std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) { return a.value > b.value; });
  return found;
}

Vec2 robin_argmax(const GreenEvaluator& e, int scan) {
  const DomainShape& shape = e.shape();
  const BoundingBox box = shape.bounding_box();
  Vec2 best = shape.center();
  double best_v = shape.contains(best) ? e.robin(best) : -std::numeric_limits<double>::infinity();
  for (int j = 0; j < scan; ++j)
    for (int i = 0; i < scan; ++i) {
      const Vec2 x{box.lo.x + (box.hi.x - box.lo.x) * (i + 0.5) / scan,
                   box.lo.y + (box.hi.y - box.lo.y) * (j + 0.5) / scan};
      if (!shape.contains(x) || shape.distance_to_boundary(x) < 0.05 * shape.inradius()) continue;
      const double v = e.robin(x);
      if (v > best_v) {
        best_v = v;
        best = x;
      }
    }
  // Newton polish on grad h with a finite-difference Hessian.
  const double step = 1e-4 * shape.diameter();
  auto grad = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const Vec2 g = e.grad_robin({z[0], z[1]});
    return Eigen::Vector2d{g.x, g.y};
  };
  Eigen::VectorXd z = Eigen::Vector2d{best.x, best.y};
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd g = grad(z);
    if (g.norm() < 1e-13) break;
    const Eigen::MatrixXd h = fd_hessian(grad, z, step);
    Eigen::VectorXd dz = -h.ldlt().solve(g);
    const double cap = 0.5 * (box.hi.x - box.lo.x) / scan;
    if (dz.norm() > cap) dz *= cap / dz.norm();
    const Vec2 nx{z[0] + dz[0], z[1] + dz[1]};
    if (!shape.contains(nx)) break;
    z += dz;
    if (dz.norm() < 1e-15) break;
  }
  return {z[0], z[1]};
}

double angular_gap(double theta, const std::vector<double>& targets) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : targets) {
    double d = std::fmod(std::abs(theta - t), kTwoPi);
    best = std::min(best, std::min(d, kTwoPi - d));
  }
  return best;
}

NormalDerivativeScan minimize_normal_derivative(const GreenEvaluator& e, Vec2 x0, int samples) {
  std::vector<double> f(samples);
  for (int k = 0; k < samples; ++k) f[k] = e.normal_derivative_green(x0, kTwoPi * k / samples);
  const auto [mn, mx] = std::minmax_element(f.begin(), f.end());
  NormalDerivativeScan out;
  out.min_value = *mn;
  const double spread = *mx - *mn;
  if (spread <= 1e-6 * std::abs(*mn)) {
    out.degenerate = true;
    for (int k = 0; k < samples; ++k) out.minimizers.push_back(kTwoPi * k / samples);
    return out;
  }
  // Golden-section polish of every sampled local minimum, then keep the global ones.
  const double dt = kTwoPi / samples;
  std::vector<std::pair<double, double>> minima;
  for (int k = 0; k < samples; ++k) {
    const double prev = f[(k + samples - 1) % samples];
    const double next = f[(k + 1) % samples];
    if (!(f[k] <= prev && f[k] < next)) continue;
    if (f[k] > *mn + 0.1 * spread) continue;
    double a = kTwoPi * k / samples - dt, b = kTwoPi * k / samples + dt;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = e.normal_derivative_green(x0, c), fd = e.normal_derivative_green(x0, d);
    while (b - a > 1e-10) {
      if (fc < fd) {
        b = d; d = c; fd = fc; c = b - r * (b - a); fc = e.normal_derivative_green(x0, c);
      } else {
        a = c; c = d; fc = fd; d = a + r * (b - a); fd = e.normal_derivative_green(x0, d);
      }
    }
    const double t = 0.5 * (a + b);
    minima.emplace_back(std::fmod(t + kTwoPi, kTwoPi), e.normal_derivative_green(x0, t));
  }
  double best = out.min_value;
  for (const auto& m : minima) best = std::min(best, m.second);
  out.min_value = best;
  for (const auto& m : minima)
    if (m.second <= best + 1e-6 * std::abs(best)) out.minimizers.push_back(m.first);
  return out;
}

BranchReport sweep_gamma(const GreenEvaluator& e, const std::vector<double>& gammas, double tau,
                         const VortexConfig& seed, const SearchOptions& options) {
  if (gammas.empty()) throw Error(ErrorKind::InvalidArgument, "empty gamma schedule");
  const bool increasing = gammas.size() < 2 || gammas[1] > gammas[0];
  for (std::size_t i = 1; i < gammas.size(); ++i)
    if ((gammas[i] > gammas[i - 1]) != increasing || gammas[i] == gammas[i - 1])
      throw Error(ErrorKind::InvalidArgument, "gamma schedule must be strictly monotone");
  const bool xi2_escapes = gammas.size() < 2 ? gammas[0] >= 1.0 : increasing;

  BranchReport report;
  report.argmax_h = robin_argmax(e);
  report.boundary_scan = minimize_normal_derivative(e, report.argmax_h);

  VortexConfig cur = seed;
  cur.tau = tau;
  double prev_gamma = gammas[0];
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double target = gammas[i];
    CriticalPoint cp;
    bool ok = false;
    for (int sub : {1, 2, 4, 8, 16}) {
      if (i == 0 && sub > 1) break;
      VortexConfig trial = cur;
      try {
        for (int k = 1; k <= sub; ++k) {
          trial.gamma = prev_gamma * std::pow(target / prev_gamma, static_cast<double>(k) / sub);
          cp = refine_critical_point(e, trial, options);
          trial = cp.cfg;
        }
        ok = true;
        break;
      } catch (const Error& err) {
        report.message = err.what();
      }
    }
    if (!ok) {
      report.branch_lost = true;
      report.lost_at = target;
      return report;
    }
    cur = cp.cfg;
    prev_gamma = target;

    SweepRecord r;
    r.gamma = target;
    r.cfg = cp.cfg;
    r.value = cp.value;
    r.grad_norm = cp.grad_norm;
    r.classification = cp.classification;
    r.escaping = xi2_escapes ? cp.cfg.xi2 : cp.cfg.xi1;
    r.concentrating = xi2_escapes ? cp.cfg.xi1 : cp.cfg.xi2;
    const BoundaryData bd = e.shape().nearest_boundary(r.escaping);
    r.dist_boundary = bd.distance;
    r.dist_argmax = norm(r.concentrating - report.argmax_h);
    r.theta = bd.theta;
    r.nu_gap = angular_gap(bd.theta, report.boundary_scan.minimizers);
    r.nu_value = e.normal_derivative_green(r.concentrating, bd.theta);
    r.nu_min = minimize_normal_derivative(e, r.concentrating, 256).min_value;
    report.records.push_back(r);
  }
  report.message.clear();
  return report;
}

}  // namespace vortexlab
