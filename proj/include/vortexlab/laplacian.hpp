#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Sparse>

#include "vortexlab/grid.hpp"

namespace vortexlab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Interior node whose stencil reaches outside the domain. The neighbour value is replaced by
/// Dirichlet data at the boundary crossing `point`, a fraction `fraction` of the way along the
/// grid edge.
struct BoundaryLink {
  int unknown = 0;
  int direction = 0;  // 0: +x, 1: -x, 2: +y, 3: -y
  Vec2 point;
  double fraction = 1.0;
  double coeff = 0.0;  // weight of the boundary value in row `unknown`
};

/// Cut-cell finite-volume discretization of -Laplace on the interior nodes of a grid.
/// Row i of the matrix is V_i times the discrete -Laplace at node i (V_i the dual-cell area), so
/// the matrix is symmetric positive definite. Dirichlet data enter only through the links.
/// Immutable after construction; the Cholesky factor is built lazily and shared.
class DiscreteOperator {
 public:
  explicit DiscreteOperator(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int unknowns() const { return static_cast<int>(node_of_.size()); }
  /// Unknown index of a grid node, -1 outside.
  int unknown(std::size_t node) const { return unknown_of_[node]; }
  std::size_t node(int unknown) const { return node_of_[unknown]; }

  const SparseMatrix& matrix() const { return matrix_; }
  const Eigen::VectorXd& volumes() const { return volumes_; }
  const std::vector<BoundaryLink>& links() const { return links_; }

  /// Dirichlet data sampled at the link points.
  Eigen::VectorXd link_values(const std::function<double(Vec2)>& g) const;
  /// Right-hand-side contribution of link values.
  Eigen::VectorXd boundary_rhs(const Eigen::VectorXd& link_values) const;

  Eigen::VectorXd restrict_field(const GridField& f) const;
  GridField extend(const Eigen::VectorXd& u) const;

  /// Discrete -Laplace of `u` at interior nodes, boundary data g (zero when empty).
  GridField apply(const GridField& u, const std::function<double(Vec2)>& g = {}) const;

  /// Solve -Laplace_h u = source in the interior, u = g on the boundary.
  GridField solve(const GridField* source, const std::function<double(Vec2)>& g = {}) const;
  /// A^{-1} rhs through the cached sparse Cholesky factor. Throws SolverFailure.
  Eigen::VectorXd solve_matrix(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve_matrix(const Eigen::MatrixXd& rhs) const;

 private:
  using Factor = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
  const Factor& factor() const;

  GridPtr grid_;
  std::vector<int> unknown_of_;
  std::vector<std::size_t> node_of_;
  SparseMatrix matrix_;
  Eigen::VectorXd volumes_;
  std::vector<BoundaryLink> links_;
  mutable std::once_flag factor_once_;
  mutable std::unique_ptr<Factor> factor_;
};

using OperatorPtr = std::shared_ptr<const DiscreteOperator>;

inline OperatorPtr assemble(GridPtr grid) { return std::make_shared<const DiscreteOperator>(std::move(grid)); }

struct LinearSolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite matrix.
/// Throws MaxIterations when the tolerance is not met, Breakdown on a non-positive curvature
/// direction (the matrix is not positive definite).
Eigen::VectorXd linear_solve(const SparseMatrix& a, const Eigen::VectorXd& rhs, double tol,
                             LinearSolveStats* stats = nullptr, int max_iter = 0);

}  // namespace vortexlab
