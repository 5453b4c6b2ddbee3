#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vortexlab/green.hpp"

namespace vortexlab {

/// Vortex pair with intensities (1, -1/gamma) and weight tau.
struct VortexConfig {
  Vec2 xi1;
  Vec2 xi2;
  double gamma = 1.0;
  double tau = 1.0;
};

/// Separation and boundary margin of a pair: min(|xi1 - xi2|, d(xi1), d(xi2)).
double config_margin(const DomainShape& shape, const VortexConfig& cfg);
void validate_config(const DomainShape& shape, const VortexConfig& cfg);

/// H_gamma(xi1, xi2) = h(xi1) + h(xi2)/gamma^2 - 2 G(xi1, xi2)/gamma.
double eval_hamiltonian(const GreenEvaluator& e, const VortexConfig& cfg);
/// sum_{i != j} r_i r_j G(x_i, x_j) + sum_i r_i^2 h(x_i).
double eval_kirchhoff_routh(const GreenEvaluator& e, const std::vector<Vec2>& points,
                            const std::vector<double>& intensities);
/// (dH/dxi1, dH/dxi2) as a 4-vector (xi1.x, xi1.y, xi2.x, xi2.y).
Eigen::Vector4d grad_hamiltonian(const GreenEvaluator& e, const VortexConfig& cfg);
/// Central differences of the gradient with step 1e-4 * diameter (default), symmetrized.
Eigen::Matrix4d hessian_hamiltonian(const GreenEvaluator& e, const VortexConfig& cfg, double step = 0.0);

Eigen::Vector4d config_vector(const VortexConfig& cfg);
VortexConfig config_from_vector(const Eigen::Vector4d& z, double gamma, double tau);

enum class Classification { Maximum, Minimum, Saddle, Degenerate };
const char* to_string(Classification c);

/// Eigenvalues with |lambda| <= rel_zero * max|lambda| count as zero (degenerate).
Classification classify_eigenvalues(const Eigen::VectorXd& eigenvalues, double rel_zero = 1e-4);
Classification classify_hessian(const Eigen::MatrixXd& hessian, double rel_zero = 1e-4);
/// Symmetrized central-difference Jacobian of a gradient map.
Eigen::MatrixXd fd_hessian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                           const Eigen::VectorXd& z, double step);

struct CriticalPoint {
  VortexConfig cfg;
  double value = 0.0;
  double grad_norm = 0.0;
  Eigen::Matrix4d hessian = Eigen::Matrix4d::Zero();
  Eigen::Vector4d eigenvalues = Eigen::Vector4d::Zero();
  Classification full_classification = Classification::Degenerate;
  /// On the disk the rotation is fixed by keeping xi1 on the ray {center + (s, 0), s >= 0}; the
  /// classification then uses the Hessian restricted to that 3-dimensional slice.
  bool gauge_fixed = false;
  Eigen::VectorXd restricted_eigenvalues;
  Classification classification = Classification::Degenerate;
  double margin = 0.0;
  int seed = -1;
};

/// Fill value, Hessian, eigenvalues and classification of a converged configuration.
void classify_critical_point(const GreenEvaluator& e, CriticalPoint& cp);

struct SearchOptions {
  int starts = 64;
  std::uint64_t seed = 1;
  double eta = -1.0;       // condition margin; default 0.05 * inradius
  int gauge = -1;          // -1 auto (disk only), 0 off, 1 on
  double tol_rel = 1e-8;   // ||grad|| <= tol_rel * (1 + |H|)
  int max_iter = 200;
};

/// Multistart damped Newton (Levenberg-Marquardt on the gradient) with a decreasing
/// logarithmic barrier, barrier removed for the final polish. Returns deduplicated critical
/// points with margin >= eta; may be empty.
std::vector<CriticalPoint> find_critical_points(const GreenEvaluator& e, double gamma, double tau,
                                                const SearchOptions& options = {});

/// Barrier-free Newton polish from a starting configuration. Throws NoConvergence.
CriticalPoint refine_critical_point(const GreenEvaluator& e, const VortexConfig& start,
                                    const SearchOptions& options = {});

/// Maximum point of the Robin function: interior grid scan then Newton polish.
Vec2 robin_argmax(const GreenEvaluator& e, int scan = 41);

struct NormalDerivativeScan {
  double min_value = 0.0;
  std::vector<double> minimizers;  // boundary parameters of all global minimizers
  bool degenerate = false;         // the function is flat within tolerance
};

/// Minimizers of theta -> dG/dnu(x0, y(theta)): dense scan plus golden-section polish.
NormalDerivativeScan minimize_normal_derivative(const GreenEvaluator& e, Vec2 x0, int samples = 1024);

/// Smallest angular distance from theta to any of the targets.
double angular_gap(double theta, const std::vector<double>& targets);

struct SweepRecord {
  double gamma = 0.0;
  VortexConfig cfg;
  double value = 0.0;
  double grad_norm = 0.0;
  Classification classification = Classification::Degenerate;
  /// The escaping point is xi2 when gamma >= 1 and xi1 when gamma < 1 (roles swap).
  Vec2 escaping;
  Vec2 concentrating;
  double dist_boundary = 0.0;   // d(escaping, boundary)
  double dist_argmax = 0.0;     // |concentrating - argmax h|
  double theta = 0.0;           // boundary parameter of p(escaping)
  double nu_gap = 0.0;          // angular gap to the nearest minimizer of dG/dnu(argmax h, .)
  double nu_value = 0.0;        // dG/dnu(concentrating, p(escaping))
  double nu_min = 0.0;          // min over the boundary of dG/dnu(concentrating, .)
};

struct BranchReport {
  std::vector<SweepRecord> records;
  bool branch_lost = false;
  double lost_at = 0.0;
  std::string message;
  Vec2 argmax_h;
  NormalDerivativeScan boundary_scan;
};

/// Continuation of a critical point along a monotone gamma schedule (warm start from the previous
/// gamma, geometric sub-steps on failure). Truncates with branch_lost set if Newton fails.
BranchReport sweep_gamma(const GreenEvaluator& e, const std::vector<double>& gammas, double tau,
                         const VortexConfig& seed, const SearchOptions& options = {});

}  // namespace vortexlab
