#include "vortexlab/laplacian.hpp"

#include <algorithm>
#include <cmath>

namespace vortexlab {

namespace {
// Crossings closer than this fraction of an edge are pinned to it; keeps the matrix finite.
constexpr double kMinFraction = 1e-6;
}

DiscreteOperator::DiscreteOperator(GridPtr grid) : grid_(std::move(grid)) {
  const Grid& g = *grid_;
  unknown_of_.assign(g.size(), -1);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.inside(i, j)) {
        if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1)
          throw Error(ErrorKind::InvalidArgument, "interior node on the grid edge");
        unknown_of_[g.index(i, j)] = static_cast<int>(node_of_.size());
        node_of_.push_back(g.index(i, j));
      }

  const int n = unknowns();
  volumes_.resize(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * static_cast<std::size_t>(n));
  constexpr int di[4] = {1, -1, 0, 0};
  constexpr int dj[4] = {0, 0, 1, -1};
  for (int k = 0; k < n; ++k) {
    const std::size_t node = node_of_[k];
    const int i = static_cast<int>(node % g.nx);
    const int j = static_cast<int>(node / g.nx);
    const Vec2 p = g.node(i, j);
    const double wx = g.dual_x(i);
    const double wy = g.dual_y(j);
    volumes_[k] = wx * wy;
    double diag = 0.0;
    for (int d = 0; d < 4; ++d) {
      const int in = i + di[d];
      const int jn = j + dj[d];
      const Vec2 q = g.node(in, jn);
      const double len = d < 2 ? std::abs(q.x - p.x) : std::abs(q.y - p.y);
      const double w = d < 2 ? wy : wx;
      const int nb = unknown_of_[g.index(in, jn)];
      if (nb >= 0) {
        diag += w / len;
        trip.emplace_back(k, nb, -w / len);
      } else {
        const double t = std::max(g.shape.crossing_fraction(p, q), kMinFraction);
        const double c = w / (t * len);
        diag += c;
        links_.push_back({k, d, p + t * (q - p), t, c});
      }
    }
    trip.emplace_back(k, k, diag);
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(trip.begin(), trip.end());
  matrix_.makeCompressed();
}

Eigen::VectorXd DiscreteOperator::link_values(const std::function<double(Vec2)>& g) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(links_.size()));
  for (std::size_t l = 0; l < links_.size(); ++l) v[l] = g ? g(links_[l].point) : 0.0;
  return v;
}

Eigen::VectorXd DiscreteOperator::boundary_rhs(const Eigen::VectorXd& lv) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns());
  for (std::size_t l = 0; l < links_.size(); ++l) b[links_[l].unknown] += links_[l].coeff * lv[l];
  return b;
}

Eigen::VectorXd DiscreteOperator::restrict_field(const GridField& f) const {
  Eigen::VectorXd u(unknowns());
  for (int k = 0; k < unknowns(); ++k) u[k] = f.values[node_of_[k]];
  return u;
}

GridField DiscreteOperator::extend(const Eigen::VectorXd& u) const {
  GridField f(grid_);
  for (int k = 0; k < unknowns(); ++k) f.values[node_of_[k]] = u[k];
  return f;
}

GridField DiscreteOperator::apply(const GridField& u, const std::function<double(Vec2)>& g) const {
  Eigen::VectorXd au = matrix_ * restrict_field(u);
  if (g) au -= boundary_rhs(link_values(g));
  return extend(au.cwiseQuotient(volumes_));
}

const DiscreteOperator::Factor& DiscreteOperator::factor() const {
  std::call_once(factor_once_, [this] {
    auto f = std::make_unique<Factor>();
    f->compute(matrix_);
    factor_ = std::move(f);
  });
  if (factor_->info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "Cholesky factorization failed");
  return *factor_;
}

Eigen::VectorXd DiscreteOperator::solve_matrix(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = factor().solve(rhs);
  if (!x.allFinite()) throw Error(ErrorKind::SolverFailure, "non-finite solution");
  return x;
}

Eigen::MatrixXd DiscreteOperator::solve_matrix(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd x = factor().solve(rhs);
  if (!x.allFinite()) throw Error(ErrorKind::SolverFailure, "non-finite solution");
  return x;
}

GridField DiscreteOperator::solve(const GridField* source, const std::function<double(Vec2)>& g) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns());
  if (source) rhs = restrict_field(*source).cwiseProduct(volumes_);
  if (g) rhs += boundary_rhs(link_values(g));
  return extend(solve_matrix(rhs));
}

Eigen::VectorXd linear_solve(const SparseMatrix& a, const Eigen::VectorXd& rhs, double tol,
                             LinearSolveStats* stats, int max_iter) {
  const Eigen::Index n = rhs.size();
  if (a.rows() != n || a.cols() != n) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (max_iter <= 0) max_iter = static_cast<int>(std::max<Eigen::Index>(100, 10 * n));
  Eigen::VectorXd dinv = a.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dinv[i] > 0.0)) throw Error(ErrorKind::Breakdown, "non-positive diagonal entry");
    dinv[i] = 1.0 / dinv[i];
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd ap = a * p;
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0)) throw Error(ErrorKind::Breakdown, "matrix is not positive definite");
    const double alpha = rz / curvature;
    x += alpha * p;
    r -= alpha * ap;
    const double rel = r.norm() / bnorm;
    if (rel <= tol) {
      // Confirm with the true residual before reporting success.
      const double true_rel = (rhs - a * x).norm() / bnorm;
      if (true_rel <= tol) {
        if (stats) *stats = {it, true_rel};
        return x;
      }
      r = rhs - a * x;
    }
    z = dinv.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw Error(ErrorKind::MaxIterations, "conjugate gradients did not reach the tolerance");
}

}  // namespace vortexlab
