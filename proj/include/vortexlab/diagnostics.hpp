#pragma once

#include <vector>

#include "vortexlab/pde.hpp"

namespace vortexlab {

/// m+ = rho^2 int e^u, m- = tau rho^2 int e^{-gamma u}, lambda = m+ + m-/gamma (dual-cell quadrature).
struct BlowupMasses {
  double m_plus = 0.0;
  double m_minus = 0.0;
  double lambda = 0.0;
  double gamma = 1.0;
  bool saturated = false;

  double n1() const { return kEightPi; }
  double n2() const { return kEightPi / gamma; }
  double lambda_target() const { return kEightPi * (1.0 + 1.0 / (gamma * gamma)); }
  double err_plus() const { return std::abs(m_plus - n1()) / n1(); }
  double err_minus() const { return std::abs(m_minus - n2()) / n2(); }
  double err_lambda() const { return std::abs(lambda - lambda_target()) / lambda_target(); }
};

BlowupMasses blowup_masses(const GridField& u, const DiscreteOperator& op, const NonlinearityParams& p);
/// Assembles the operator of u's grid for the cut-cell volumes.
BlowupMasses blowup_masses(const GridField& u, const NonlinearityParams& p);
/// Second-order Richardson extrapolation (4 fine - coarse) / 3 from an h / 2h pair.
BlowupMasses richardson(const BlowupMasses& fine, const BlowupMasses& coarse);

struct NodalReport {
  int count = 0;
  std::vector<int> signs;      // +1 / -1 per component
  std::vector<double> areas;   // per component
  std::vector<int> labels;     // per grid node, -1 below threshold or outside
  double threshold = 0.0;
  int positive() const;
  int negative() const;
};

/// 4-connected components of {|u| > threshold}, split by sign; threshold_rel * sup|u| by default.
NodalReport nodal_domains(const GridField& u, double threshold_rel = 1e-8);

/// g1 = grad_xi [H(xi, xi1) - G(xi, xi2)/gamma] at xi1, g2 = grad_xi [H(xi, xi2)/gamma - G(xi, xi1)] at
/// xi2, with the regular parts differentiated by 4th-order central differences of regular_part.
struct LocationResiduals {
  Vec2 g1;
  Vec2 g2;
  double r1 = 0.0;
  double r2 = 0.0;
};
LocationResiduals location_conditions(const GreenEvaluator& e, const VortexConfig& cfg);

/// Relative discrepancy |grad h - 2 grad_x H(., xi)|diag| / |grad h| at a point.
double robin_identity_error(const GreenEvaluator& e, Vec2 xi);

struct AsymptoticsReport {
  bool boundary_decreasing = false;   // d(escaping point, boundary) strictly decreasing
  bool argmax_decreasing = false;     // |concentrating - argmax h| non-increasing
  bool gap_decreasing = false;        // boundary gap non-increasing (1e-6 rad noise floor)
  double final_distance = 0.0;
  double final_argmax_distance = 0.0;
  double final_gap = 0.0;
  double diameter = 0.0;
  bool argmax_close = false;          // final_argmax_distance <= 0.02 * diameter
  bool gap_close = false;             // final_gap <= 0.05 rad
  bool degenerate_minimizer = false;
  bool branch_complete = false;
  bool pass() const;
};

AsymptoticsReport asymptotics_report(const BranchReport& sweep, const GreenEvaluator& e);

}  // namespace vortexlab
