#include "vortexlab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace vortexlab {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

struct Evaluation {
  Eigen::VectorXd residual;  // -Laplace_h u - f(u)
  Eigen::VectorXd fprime;
  double sup = 0.0;
  double merit = 0.0;  // discrete L2 norm of the residual
  double f_sup = 0.0;
  bool saturated = false;
};

Evaluation evaluate(const DiscreteOperator& op, const Eigen::VectorXd& u, const NonlinearityParams& p) {
  Evaluation ev;
  const Eigen::VectorXd& vol = op.volumes();
  ev.residual = op.matrix() * u;
  ev.fprime.resize(u.size());
  double m = 0.0;
  for (int k = 0; k < u.size(); ++k) {
    const NonlinearityValue nl = nonlinearity(u[k], p);
    ev.saturated = ev.saturated || nl.saturated;
    ev.residual[k] = ev.residual[k] / vol[k] - nl.f;
    ev.fprime[k] = nl.fp;
    ev.f_sup = std::max(ev.f_sup, std::abs(nl.f));
    ev.sup = std::max(ev.sup, std::abs(ev.residual[k]));
    m += vol[k] * ev.residual[k] * ev.residual[k];
  }
  ev.merit = std::sqrt(m);
  if (!std::isfinite(ev.merit)) ev.merit = ev.sup = std::numeric_limits<double>::infinity();
  return ev;
}

// Newton linear algebra with the symbolic analysis done once per operator. `factor` fixes the
// Jacobian; `solve` may then be called repeatedly (simplified Newton corrections reuse it).
class JacobianSolver {
 public:
  explicit JacobianSolver(const DiscreteOperator& op) : op_(op) {}

  // Factors A - diag(V f'), sparse LDL^T first and LU when the LDL^T solve is inaccurate.
  void factor(const Evaluation& ev) {
    const Eigen::VectorXd& vol = op_.volumes();
    j_ = op_.matrix();
    for (int k = 0; k < j_.rows(); ++k) j_.coeffRef(k, k) -= vol[k] * ev.fprime[k];
    if (!ldlt_analyzed_) {
      ldlt_.analyzePattern(j_);
      ldlt_analyzed_ = true;
    }
    ldlt_.factorize(j_);
    use_lu_ = false;
    if (ldlt_.info() == Eigen::Success) {
      const Eigen::VectorXd rhs = -(vol.array() * ev.residual.array()).matrix();
      const Eigen::VectorXd d = ldlt_.solve(rhs);
      if (d.allFinite() && (j_ * d - rhs).norm() <= 1e-8 * std::max(rhs.norm(), 1e-300)) return;
    }
    if (!lu_analyzed_) {
      lu_.analyzePattern(j_);
      lu_analyzed_ = true;
    }
    lu_.factorize(j_);
    if (lu_.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "singular Newton Jacobian");
    use_lu_ = true;
  }

  const char* method() const { return use_lu_ ? "lu" : "ldlt"; }

  // Correction d with J d = -V r for the residual r of `ev`.
  Eigen::VectorXd solve(const Evaluation& ev) const {
    const Eigen::VectorXd rhs = -(op_.volumes().array() * ev.residual.array()).matrix();
    Eigen::VectorXd d = use_lu_ ? Eigen::VectorXd(lu_.solve(rhs)) : Eigen::VectorXd(ldlt_.solve(rhs));
    if (!d.allFinite() || (j_ * d - rhs).norm() > 1e-6 * std::max(rhs.norm(), 1e-300))
      throw Error(ErrorKind::SolverFailure, "Newton Jacobian solve is inaccurate");
    return d;
  }

 private:
  const DiscreteOperator& op_;
  SparseMatrix j_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool ldlt_analyzed_ = false;
  bool lu_analyzed_ = false;
  bool use_lu_ = false;
};

// Volume-weighted L2 norm of a nodal correction.
double weighted_norm(const Eigen::VectorXd& d, const Eigen::VectorXd& vol) {
  return std::sqrt((vol.array() * d.array().square()).sum());
}

}  // namespace

double pde_residual(const DiscreteOperator& op, const GridField& u, const NonlinearityParams& p) {
  validate_params(p);
  return evaluate(op, op.restrict_field(u), p).sup;
}

SolveResult newton_solve(const DiscreteOperator& op, const NonlinearityParams& p, const GridField& u0,
                         const NewtonOptions& options, std::string provenance) {
  validate_params(p);
  if (u0.grid.get() != &op.grid() && (u0.grid->nx != op.grid().nx || u0.grid->ny != op.grid().ny))
    throw Error(ErrorKind::InvalidArgument, "initial guess lives on a different grid");
  SolveResult res;
  res.provenance = std::move(provenance);

  Eigen::VectorXd u = op.restrict_field(u0);
  Evaluation ev = evaluate(op, u, p);
  JacobianSolver jac(op);
  res.history.push_back({0, ev.sup, 0.0, ""});
  res.status = SolveStatus::MaxIterations;

  for (int it = 1;; ++it) {
    res.tolerance = options.tol_rel * (1.0 + ev.f_sup);
    if (ev.sup <= res.tolerance) {
      res.status = SolveStatus::Converged;
      break;
    }
    if (it > options.max_iter) {
      res.message = "no convergence in " + std::to_string(options.max_iter) + " Newton iterations";
      break;
    }
    Eigen::VectorXd d;
    try {
      jac.factor(ev);
      d = jac.solve(ev);
    } catch (const Error& err) {
      res.status = SolveStatus::Diverged;
      res.message = err.what();
      break;
    }
    const std::string method = jac.method();
    // Error-oriented damping: accept u + t d when the simplified correction J(u)^{-1} F(u + t d)
    // is smaller than (1 - t/4) |d|. Unlike a residual test this does not reject steps along the
    // near-kernel (bubble translation) directions of the linearization.
    const double dnorm = weighted_norm(d, op.volumes());
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, step *= 0.5) {
      const Eigen::VectorXd trial = u + step * d;
      Evaluation next = evaluate(op, trial, p);
      bool ok = next.sup <= options.tol_rel * (1.0 + next.f_sup);
      if (!ok && std::isfinite(next.merit)) {
        try {
          ok = weighted_norm(jac.solve(next), op.volumes()) <= (1.0 - 0.25 * step) * dnorm;
        } catch (const Error&) {
          ok = false;
        }
      }
      if (ok) {
        u = trial;
        ev = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = SolveStatus::Diverged;
      res.message = "line search failed after " + std::to_string(options.max_halvings) + " halvings";
      break;
    }
    res.history.push_back({it, ev.sup, step, method});
  }
  res.u = op.extend(u);
  res.residual = ev.sup;
  res.saturated = ev.saturated;
  return res;
}

GridPtr continuation_grid(const DomainShape& shape, const VortexConfig& cfg, const Deltas& deltas,
                          const ContinuationOptions& options) {
  if (options.graded) return ansatz_grid(shape, options.n, cfg, deltas, options.resolution, options.growth);
  GridPtr grid = make_grid(shape, options.n);
  const double dmin = std::min(deltas.delta1(), deltas.delta2());
  const double h = std::max(grid->local_spacing(cfg.xi1), grid->local_spacing(cfg.xi2));
  if (dmin / h < 8.0) {
    const BoundingBox box = shape.bounding_box();
    const double width = std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y);
    const long needed = static_cast<long>(std::ceil(8.0 * width / dmin)) + 1;
    throw Error(ErrorKind::GridTooCoarse, "uniform grid with n = " + std::to_string(options.n) +
                                              " resolves the smallest bubble (delta = " + std::to_string(dmin) +
                                              ") with fewer than 8 cells; use n >= " + std::to_string(needed) +
                                              " or enable grid.auto_refine");
  }
  return grid;
}

ContinuationResult continuation(const GreenEvaluator& e, const VortexConfig& cfg, const std::vector<double>& rhos,
                                const ContinuationOptions& options) {
  ContinuationResult out;
  GridField correction;  // u - W from the previous step
  for (double rho : rhos) {
    const NonlinearityParams p{rho, cfg.tau, cfg.gamma};
    validate_params(p);
    ContinuationStep step;
    step.rho = rho;
    const Deltas deltas = compute_deltas(e, cfg, rho);
    step.op = assemble(continuation_grid(e.shape(), cfg, deltas, options));
    step.ansatz = build_ansatz(e, *step.op, cfg, p, options.mode);

    GridField u0 = step.ansatz.field;
    std::string provenance = "ansatz";
    if (!correction.values.empty()) {
      const GridField carried = sample_field(step.op->grid_ptr(), [&](Vec2 x) { return correction.sample(x); });
      for (std::size_t k = 0; k < u0.values.size(); ++k) u0.values[k] += carried.values[k];
      provenance = "ansatz+transported correction";
    }
    step.solve = newton_solve(*step.op, p, u0, options.newton, provenance);
    const bool ok = step.solve.converged();
    if (ok) {
      correction = GridField(step.op->grid_ptr());
      for (std::size_t k = 0; k < correction.values.size(); ++k)
        correction.values[k] = step.solve.u.values[k] - step.ansatz.field.values[k];
    }
    out.steps.push_back(std::move(step));
    if (!ok) {
      out.branch_lost = true;
      out.lost_at = rho;
      out.message = "Newton failed at rho = " + std::to_string(rho) + ": " + out.steps.back().solve.message;
      break;
    }
  }
  return out;
}

}  // namespace vortexlab
