#pragma once

#include <functional>
#include <string>

#include "vortexlab/hamiltonian.hpp"
#include "vortexlab/laplacian.hpp"

namespace vortexlab {

/// Liouville bubble w(x) = log(8 delta^2 / (delta^2 + |x - xi|^2)^2).
struct BubbleParams {
  double delta = 1.0;
  Vec2 xi;
};

/// f(t) = rho^2 (e^t - tau e^{-gamma t}).
struct NonlinearityParams {
  double rho = 0.01;
  double tau = 1.0;
  double gamma = 1.0;
};
void validate_params(const NonlinearityParams& p);

double bubble(const BubbleParams& b, Vec2 x);
/// e^{w(x)} computed without forming w.
double bubble_density(const BubbleParams& b, Vec2 x);
/// psi^0 = (delta^2 - r^2)/(delta^2 + r^2), psi^j = (x_j - xi_j)/(delta^2 + r^2), j = 1, 2.
double kernel_psi(int j, const BubbleParams& b, Vec2 x);

/// log delta_1^2 = log(rho^2/8) + 8 pi h(xi1) - (8 pi/gamma) G(xi1, xi2)
/// log delta_2^2 = log(rho^2 tau gamma/8) + 8 pi h(xi2) - 8 pi gamma G(xi1, xi2)
struct Deltas {
  double log_delta1_sq = 0.0;
  double log_delta2_sq = 0.0;
  double delta1() const { return std::exp(0.5 * log_delta1_sq); }
  double delta2() const { return std::exp(0.5 * log_delta2_sq); }
};
Deltas compute_deltas(const GreenEvaluator& e, const VortexConfig& cfg, double rho);

struct ExpansionConstants {
  double c1 = 0.0;  // -2 (log(1/8) + 1)
  double c2 = 0.0;  // -2 (log(tau gamma/8) + 1)
};
ExpansionConstants expansion_constants(double tau, double gamma);

enum class ProjectionMode { Expansion, Exact };
const char* to_string(ProjectionMode m);

/// Pw: Expansion uses w - log(8 delta^2) + 8 pi H(x, xi); Exact adds to w the discrete harmonic
/// function with boundary values -w. Exterior nodes hold 0.
GridField project_bubble(const GreenEvaluator& e, const DiscreteOperator& op, const BubbleParams& b,
                         ProjectionMode mode);

struct AnsatzField {
  GridField field;  // W = Pw1 - Pw2/gamma
  GridField pw1;
  GridField pw2;
  BubbleParams b1;
  BubbleParams b2;
  Deltas deltas;
  ProjectionMode mode = ProjectionMode::Exact;
  VortexConfig cfg;
  NonlinearityParams params;
};

AnsatzField build_ansatz(const GreenEvaluator& e, const DiscreteOperator& op, const VortexConfig& cfg,
                         const NonlinearityParams& params, ProjectionMode mode = ProjectionMode::Exact);

/// Graded grid resolving both bubbles: local spacing at each center <= delta_i / resolution.
GridPtr ansatz_grid(const DomainShape& shape, int n, const VortexConfig& cfg, const Deltas& deltas,
                    double resolution = 16.0, double growth = 0.1);

struct NonlinearityValue {
  double f = 0.0;
  double fp = 0.0;  // f'
  double F = 0.0;   // primitive rho^2 (e^t + (tau/gamma) e^{-gamma t})
  bool saturated = false;
};
/// Exponents are clamped to +-700; `saturated` reports when that happened.
NonlinearityValue nonlinearity(double t, const NonlinearityParams& p);

/// R = Laplace W + f(W) with the exact bubble Laplacians (Laplace Pw = -e^w). Throws
/// GridTooCoarse unless the local spacing at each center is at most delta_i / 8.
GridField residual_field(const AnsatzField& w);
/// Discrete L^p norm with dual-cell weights.
double lp_norm(const GridField& f, const DiscreteOperator& op, double p);

/// J(u) = 1/2 int |grad u|^2 - rho^2 int e^u - rho^2 tau int e^{-gamma u} (discrete).
double energy(const GridField& u, const DiscreteOperator& op, const NonlinearityParams& p);
/// Variational functional 1/2 int |grad u|^2 - int F(u); its gradient is -Laplace u - f(u).
double action(const GridField& u, const DiscreteOperator& op, const NonlinearityParams& p);

/// -8pi[(1+1/g^2) log rho^2 + (log(1/8)+1) + (1/g^2)(log(tau g/8)+1) + 1 + 1/g] - (8pi)^2/2 H_g.
double expansion_rhs(const GreenEvaluator& e, const VortexConfig& cfg, const NonlinearityParams& p);

/// int_{Omega cap B_eps(xi)} e^{w} f dx in polar coordinates about the bubble center
/// (eps <= 0: all of Omega). Radial Gauss-Legendre panels in log r, trapezoid in angle.
double bubble_integral(const DomainShape& shape, const BubbleParams& b, const std::function<double(Vec2)>& f,
                       double eps = 0.0, int angles = 256);
/// int_{|x - xi| < radius} e^{w} dx on the plane by the same quadrature.
double plane_bubble_mass(double delta, double radius, int angles = 64);

/// Continuum integrals of the expansion-mode ansatz, by bubble-centred quadrature.
struct AnsatzIntegrals {
  double i11 = 0.0;  // int e^{w1} Pw1
  double i22 = 0.0;  // int e^{w2} Pw2
  double i12 = 0.0;  // int e^{w1} Pw2
  double grad_sq = 0.0;     // int |grad W|^2
  double mass_plus = 0.0;   // rho^2 int e^W
  double mass_minus = 0.0;  // tau rho^2 int e^{-gamma W}
  double energy = 0.0;      // J(W)
  Deltas deltas;
};
AnsatzIntegrals ansatz_integrals(const GreenEvaluator& e, const VortexConfig& cfg, const NonlinearityParams& p,
                                 int angles = 256);

}  // namespace vortexlab
