#pragma once

#include <string>
#include <vector>

#include "vortexlab/ansatz.hpp"

namespace vortexlab {

struct NewtonOptions {
  double tol_rel = 1e-10;  // sup|-Laplace_h u - f(u)| <= tol_rel * (1 + sup|f(u)|)
  int max_iter = 50;
  int max_halvings = 20;
};

struct NewtonIterate {
  int iteration = 0;
  double residual = 0.0;  // sup norm of -Laplace_h u - f(u)
  double step = 1.0;      // accepted damping factor
  std::string linear;     // "ldlt" or "lu"
};

enum class SolveStatus { Converged, Diverged, MaxIterations };
const char* to_string(SolveStatus s);

struct SolveResult {
  GridField u;
  SolveStatus status = SolveStatus::Diverged;
  bool converged() const { return status == SolveStatus::Converged; }
  std::vector<NewtonIterate> history;
  double residual = 0.0;
  double tolerance = 0.0;
  bool saturated = false;
  std::string provenance;  // how the initial guess was built
  std::string message;
};

/// Sup norm of -Laplace_h u - f(u) over interior nodes (zero Dirichlet data).
double pde_residual(const DiscreteOperator& op, const GridField& u, const NonlinearityParams& p);

/// Damped Newton for -Laplace_h u = f(u), u = 0 on the boundary. The Jacobian
/// A - diag(V f'(u)) is symmetric but indefinite near non-minimizing solutions, so it is factored
/// by sparse LDL^T with a residual check and an LU fallback. Returns the best iterate with a
/// Diverged/MaxIterations status instead of throwing.
SolveResult newton_solve(const DiscreteOperator& op, const NonlinearityParams& p, const GridField& u0,
                         const NewtonOptions& options = {}, std::string provenance = "user");

struct ContinuationOptions {
  int n = 257;                  // base grid lines across the bounding box
  double resolution = 16.0;     // bubble scale / local spacing at each center
  double growth = 0.1;
  /// false: a uniform n-grid, rejected with GridTooCoarse when it under-resolves a bubble.
  bool graded = true;
  ProjectionMode mode = ProjectionMode::Exact;
  NewtonOptions newton;
};

struct ContinuationStep {
  double rho = 0.0;
  AnsatzField ansatz;
  SolveResult solve;
  OperatorPtr op;
};

struct ContinuationResult {
  std::vector<ContinuationStep> steps;
  bool branch_lost = false;
  double lost_at = 0.0;
  std::string message;
};

/// Grid for one rho: graded per ContinuationOptions, or the uniform n-grid after a resolution check.
GridPtr continuation_grid(const DomainShape& shape, const VortexConfig& cfg, const Deltas& deltas,
                          const ContinuationOptions& options);

/// Solutions along a decreasing rho schedule. Each rho gets its own graded grid; the first solve
/// starts from the ansatz, later ones from the new ansatz plus the previous correction u - W.
ContinuationResult continuation(const GreenEvaluator& e, const VortexConfig& cfg, const std::vector<double>& rhos,
                                const ContinuationOptions& options = {});

}  // namespace vortexlab
