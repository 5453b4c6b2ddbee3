#include "vortexlab/ansatz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace vortexlab {

namespace {

constexpr double kExpClamp = 700.0;

struct GaussRule {
  std::vector<double> nodes;  // on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss8() {
  static const GaussRule rule = gauss_legendre(8);
  return rule;
}

// Radial integral of 8 d^2 r^2 / (d^2 + r^2)^2 * g(r) dt over t = log r in [log r0, log r1].
template <class G>
double radial_integral(double delta, double r1, G&& g) {
  const double r0 = delta * 1e-9;
  if (r1 <= r0) return 0.0;
  const double t0 = std::log(r0), t1 = std::log(r1);
  const int panels = std::max(1, static_cast<int>(std::ceil((t1 - t0) / 0.5)));
  const double width = (t1 - t0) / panels;
  const GaussRule& gl = gauss8();
  const double d2 = delta * delta;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = t0 + (p + 0.5) * width;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double t = mid + 0.5 * width * gl.nodes[q];
      const double r = std::exp(t);
      const double r2 = r * r;
      const double weight = 8.0 * d2 * r2 / ((d2 + r2) * (d2 + r2));
      sum += 0.5 * width * gl.weights[q] * weight * g(r);
    }
  }
  return sum;
}

// Distance from an interior point to the boundary along direction dir.
double ray_length(const DomainShape& shape, Vec2 from, Vec2 dir) {
  const double reach = 1.01 * shape.diameter();
  return reach * shape.crossing_fraction(from, from + reach * dir);
}

void require_valid_bubble(const BubbleParams& b) {
  if (!(b.delta > 0.0) || !std::isfinite(b.delta))
    throw Error(ErrorKind::RangeError, "bubble scale must be positive");
}

}  // namespace

void validate_params(const NonlinearityParams& p) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(p.rho)) throw Error(ErrorKind::RangeError, "rho must be positive");
  if (!positive(p.tau)) throw Error(ErrorKind::RangeError, "tau must be positive");
  if (!positive(p.gamma)) throw Error(ErrorKind::RangeError, "gamma must be positive");
}

double bubble(const BubbleParams& b, Vec2 x) {
  const double d2 = b.delta * b.delta;
  const double s = d2 + norm2(x - b.xi);
  return std::log(8.0 * d2) - 2.0 * std::log(s);
}

double bubble_density(const BubbleParams& b, Vec2 x) {
  const double d2 = b.delta * b.delta;
  const double s = d2 + norm2(x - b.xi);
  return 8.0 * d2 / (s * s);
}

double kernel_psi(int j, const BubbleParams& b, Vec2 x) {
  const double d2 = b.delta * b.delta;
  const Vec2 z = x - b.xi;
  const double s = d2 + norm2(z);
  switch (j) {
    case 0: return (d2 - norm2(z)) / s;
    case 1: return z.x / s;
    case 2: return z.y / s;
    default: throw Error(ErrorKind::InvalidArgument, "kernel index must be 0, 1 or 2");
  }
}

Deltas compute_deltas(const GreenEvaluator& e, const VortexConfig& cfg, double rho) {
  validate_params({rho, cfg.tau, cfg.gamma});
  const double g = cfg.gamma;
  const double green = e.green(cfg.xi1, cfg.xi2);
  Deltas d;
  d.log_delta1_sq = std::log(rho * rho / 8.0) + kEightPi * e.robin(cfg.xi1) - kEightPi / g * green;
  d.log_delta2_sq = std::log(rho * rho * cfg.tau * g / 8.0) + kEightPi * e.robin(cfg.xi2) - kEightPi * g * green;
  return d;
}

ExpansionConstants expansion_constants(double tau, double gamma) {
  return {-2.0 * (std::log(1.0 / 8.0) + 1.0), -2.0 * (std::log(tau * gamma / 8.0) + 1.0)};
}

const char* to_string(ProjectionMode m) { return m == ProjectionMode::Exact ? "exact" : "expansion"; }

GridField project_bubble(const GreenEvaluator& e, const DiscreteOperator& op, const BubbleParams& b,
                         ProjectionMode mode) {
  require_valid_bubble(b);
  const GridPtr& grid = op.grid_ptr();
  if (mode == ProjectionMode::Expansion) {
    const auto h = e.regular_part_source(b.xi);
    const double shift = std::log(8.0 * b.delta * b.delta);
    return sample_field(grid, [&](Vec2 x) { return bubble(b, x) - shift + kEightPi * h(x); });
  }
  GridField out = op.solve(nullptr, [&](Vec2 s) { return -bubble(b, s); });
  for (int j = 0; j < grid->ny; ++j)
    for (int i = 0; i < grid->nx; ++i)
      if (grid->inside(i, j)) out.at(i, j) += bubble(b, grid->node(i, j));
  return out;
}

AnsatzField build_ansatz(const GreenEvaluator& e, const DiscreteOperator& op, const VortexConfig& cfg,
                         const NonlinearityParams& params, ProjectionMode mode) {
  validate_params(params);
  validate_config(e.shape(), cfg);
  AnsatzField a;
  a.cfg = cfg;
  a.params = params;
  a.mode = mode;
  a.deltas = compute_deltas(e, cfg, params.rho);
  a.b1 = {a.deltas.delta1(), cfg.xi1};
  a.b2 = {a.deltas.delta2(), cfg.xi2};
  a.pw1 = project_bubble(e, op, a.b1, mode);
  a.pw2 = project_bubble(e, op, a.b2, mode);
  a.field = GridField(op.grid_ptr());
  for (std::size_t k = 0; k < a.field.values.size(); ++k)
    a.field.values[k] = a.pw1.values[k] - a.pw2.values[k] / params.gamma;
  return a;
}

GridPtr ansatz_grid(const DomainShape& shape, int n, const VortexConfig& cfg, const Deltas& deltas,
                    double resolution, double growth) {
  if (!(resolution > 0.0)) throw Error(ErrorKind::RangeError, "bubble resolution must be positive");
  return make_graded_grid(shape, n,
                          {{cfg.xi1, deltas.delta1() / resolution}, {cfg.xi2, deltas.delta2() / resolution}},
                          growth);
}

NonlinearityValue nonlinearity(double t, const NonlinearityParams& p) {
  NonlinearityValue v;
  double a = t, b = -p.gamma * t;
  if (a > kExpClamp) { a = kExpClamp; v.saturated = true; }
  if (b > kExpClamp) { b = kExpClamp; v.saturated = true; }
  const double ea = std::exp(a), eb = std::exp(b);
  const double r2 = p.rho * p.rho;
  v.f = r2 * (ea - p.tau * eb);
  v.fp = r2 * (ea + p.gamma * p.tau * eb);
  v.F = r2 * (ea + p.tau / p.gamma * eb);
  return v;
}

GridField residual_field(const AnsatzField& w) {
  const Grid& grid = *w.field.grid;
  for (const BubbleParams* b : {&w.b1, &w.b2}) {
    const double h = grid.local_spacing(b->xi);
    if (b->delta / h < 8.0)
      throw Error(ErrorKind::GridTooCoarse, "bubble scale " + std::to_string(b->delta) +
                                                " is resolved by fewer than 8 cells (h = " + std::to_string(h) + ")");
  }
  GridField r(w.field.grid);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (!grid.inside(i, j)) continue;
      const Vec2 x = grid.node(i, j);
      const double lap = -bubble_density(w.b1, x) + bubble_density(w.b2, x) / w.params.gamma;
      r.at(i, j) = lap + nonlinearity(w.field.at(i, j), w.params).f;
    }
  return r;
}

double lp_norm(const GridField& f, const DiscreteOperator& op, double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::RangeError, "L^p norm needs p >= 1");
  const Eigen::VectorXd v = op.restrict_field(f);
  if (std::isinf(p)) return v.lpNorm<Eigen::Infinity>();
  double sum = 0.0;
  for (int k = 0; k < v.size(); ++k) sum += op.volumes()[k] * std::pow(std::abs(v[k]), p);
  return std::pow(sum, 1.0 / p);
}

namespace {

double dirichlet_half(const Eigen::VectorXd& u, const DiscreteOperator& op) {
  return 0.5 * u.dot(op.matrix() * u);
}

}  // namespace

double energy(const GridField& u, const DiscreteOperator& op, const NonlinearityParams& p) {
  validate_params(p);
  const Eigen::VectorXd v = op.restrict_field(u);
  double pot = 0.0;
  for (int k = 0; k < v.size(); ++k) {
    const double ea = std::exp(std::min(v[k], kExpClamp));
    const double eb = std::exp(std::min(-p.gamma * v[k], kExpClamp));
    pot += op.volumes()[k] * (ea + p.tau * eb);
  }
  return dirichlet_half(v, op) - p.rho * p.rho * pot;
}

double action(const GridField& u, const DiscreteOperator& op, const NonlinearityParams& p) {
  validate_params(p);
  const Eigen::VectorXd v = op.restrict_field(u);
  double pot = 0.0;
  for (int k = 0; k < v.size(); ++k) pot += op.volumes()[k] * nonlinearity(v[k], p).F;
  return dirichlet_half(v, op) - pot;
}

double expansion_rhs(const GreenEvaluator& e, const VortexConfig& cfg, const NonlinearityParams& p) {
  validate_params(p);
  const double g = p.gamma, ig2 = 1.0 / (g * g);
  const double bracket = (1.0 + ig2) * std::log(p.rho * p.rho) + (std::log(1.0 / 8.0) + 1.0) +
                         ig2 * (std::log(p.tau * g / 8.0) + 1.0) + 1.0 + 1.0 / g;
  VortexConfig c = cfg;
  c.gamma = g;
  c.tau = p.tau;
  return -kEightPi * bracket - 0.5 * kEightPi * kEightPi * eval_hamiltonian(e, c);
}

double bubble_integral(const DomainShape& shape, const BubbleParams& b, const std::function<double(Vec2)>& f,
                       double eps, int angles) {
  require_valid_bubble(b);
  if (angles < 8) throw Error(ErrorKind::RangeError, "angular resolution too small");
  if (!shape.contains(b.xi)) throw Error(ErrorKind::OutsideDomain, "bubble center outside the domain");
  double sum = 0.0;
  for (int a = 0; a < angles; ++a) {
    const double phi = kTwoPi * a / angles;
    const Vec2 dir{std::cos(phi), std::sin(phi)};
    double reach = ray_length(shape, b.xi, dir);
    if (eps > 0.0) reach = std::min(reach, eps);
    sum += radial_integral(b.delta, reach, [&](double r) { return f(b.xi + r * dir); });
  }
  return sum * kTwoPi / angles;
}

double plane_bubble_mass(double delta, double radius, int angles) {
  require_valid_bubble({delta, {}});
  double sum = 0.0;
  for (int a = 0; a < angles; ++a) sum += radial_integral(delta, radius, [](double) { return 1.0; });
  return sum * kTwoPi / angles;
}

AnsatzIntegrals ansatz_integrals(const GreenEvaluator& e, const VortexConfig& cfg, const NonlinearityParams& p,
                                 int angles) {
  validate_params(p);
  AnsatzIntegrals out;
  out.deltas = compute_deltas(e, cfg, p.rho);
  const BubbleParams b1{out.deltas.delta1(), cfg.xi1};
  const BubbleParams b2{out.deltas.delta2(), cfg.xi2};
  const auto h1 = e.regular_part_source(cfg.xi1);
  const auto h2 = e.regular_part_source(cfg.xi2);
  const double s1 = std::log(8.0 * b1.delta * b1.delta);
  const double s2 = std::log(8.0 * b2.delta * b2.delta);
  // Pw_i minus its bubble: the smooth harmonic remainder.
  auto c1 = [&](Vec2 x) { return -s1 + kEightPi * h1(x); };
  auto c2 = [&](Vec2 x) { return -s2 + kEightPi * h2(x); };
  auto pw1 = [&](Vec2 x) { return bubble(b1, x) + c1(x); };
  auto pw2 = [&](Vec2 x) { return bubble(b2, x) + c2(x); };
  const DomainShape& shape = e.shape();
  const double g = p.gamma, r2 = p.rho * p.rho;

  out.i11 = bubble_integral(shape, b1, pw1, 0.0, angles);
  out.i22 = bubble_integral(shape, b2, pw2, 0.0, angles);
  out.i12 = bubble_integral(shape, b1, pw2, 0.0, angles);
  out.grad_sq = out.i11 + out.i22 / (g * g) - 2.0 * out.i12 / g;
  // e^W = e^{w1} e^{c1 - Pw2/gamma};  e^{-gamma W} = e^{w2} e^{c2 - gamma Pw1}.
  out.mass_plus = r2 * bubble_integral(shape, b1, [&](Vec2 x) { return std::exp(c1(x) - pw2(x) / g); }, 0.0, angles);
  out.mass_minus =
      p.tau * r2 * bubble_integral(shape, b2, [&](Vec2 x) { return std::exp(c2(x) - g * pw1(x)); }, 0.0, angles);
  out.energy = 0.5 * out.grad_sq - out.mass_plus - out.mass_minus;
  return out;
}

}  // namespace vortexlab
