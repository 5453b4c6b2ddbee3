#pragma once

#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "vortexlab/laplacian.hpp"

namespace vortexlab {

/// Dirichlet Green's function of -Laplace on a domain:
///   G(x, y) = -(1/2pi) log|x - y| + H(x, y),  h(x) = H(x, x).
/// Implementations provide the regular part H (symmetric in its arguments) and its gradient in
/// the first argument; everything else is derived here.
class GreenEvaluator {
 public:
  virtual ~GreenEvaluator() = default;

  const DomainShape& shape() const { return shape_; }
  virtual const char* method() const = 0;

  virtual double regular_part(Vec2 x, Vec2 y) const = 0;
  virtual Vec2 grad_x_regular(Vec2 x, Vec2 y) const = 0;

  /// Throws OutsideDomain or CoincidentPoints (|x - y| < 1e-8).
  double green(Vec2 x, Vec2 y) const;
  Vec2 grad_x_green(Vec2 x, Vec2 y) const;
  double robin(Vec2 x) const;
  /// grad h(x); the default is 2 grad_x H(x, y)|_{y = x}, using the symmetry of H.
  virtual Vec2 grad_robin(Vec2 x) const;
  /// Outward normal derivative in y of G(x0, y) at the boundary point of parameter theta.
  virtual double normal_derivative_green(Vec2 x0, double theta) const = 0;

  /// x -> H(x, y) for a fixed source; implementations may precompute per source.
  virtual std::function<double(Vec2)> regular_part_source(Vec2 y) const;

 protected:
  explicit GreenEvaluator(DomainShape shape) : shape_(std::move(shape)) {}
  void require_inside(Vec2 x) const;

 private:
  DomainShape shape_;
};

using GreenPtr = std::shared_ptr<const GreenEvaluator>;

/// Method of images on a disk.
class DiskGreen final : public GreenEvaluator {
 public:
  explicit DiskGreen(const DomainShape& disk);
  const char* method() const override { return "closed_form_disk"; }
  double regular_part(Vec2 x, Vec2 y) const override;
  Vec2 grad_x_regular(Vec2 x, Vec2 y) const override;
  /// Differentiates h(x) = (1/2pi) log((R^2 - |x - c|^2) / R) directly.
  Vec2 grad_robin(Vec2 x) const override;
  double normal_derivative_green(Vec2 x0, double theta) const override;

 private:
  Vec2 c_;
  double r_;
};

struct NumericGreenOptions {
  int n = 257;
  /// Subtract the osculating-circle image of sources near the boundary before the grid solve.
  bool boundary_subtraction = true;
  std::size_t cache_capacity = 64;
  /// Directory for the on-disk copy of the per-point weights; empty means VORTEXLAB_CACHE_DIR
  /// (no disk cache when that is unset too).
  std::string cache_dir;
};

/// Harmonic-correction Green's function on a uniform cut-cell grid.
///
/// For a fixed evaluation point x the grid solution of the correction problem is a linear
/// functional of the boundary data, c(x) = sum_k mu_k(x) g_k, with g_k the data at the boundary
/// crossings s_k. mu(x) costs one Cholesky back-substitution (cached per x) and makes
///   Hhat(x, y) = chi(y) S(x, y) + sum_k mu_k(x) [ (1/2pi) log|s_k - y| - chi(y) S(s_k, y) ]
/// an explicit function of y. S is the image term of the osculating circle at the projection of
/// y and chi a smooth cutoff to the boundary tube; both are exact for the disk. Off-grid values
/// use a C2 cubic-spline quasi-interpolant with extrapolated ghost nodes. The reported H is the
/// symmetric part (Hhat(x, y) + Hhat(y, x)) / 2.
class NumericGreen final : public GreenEvaluator {
 public:
  NumericGreen(const DomainShape& shape, NumericGreenOptions options = {});

  const char* method() const override { return "numeric"; }
  double regular_part(Vec2 x, Vec2 y) const override;
  Vec2 grad_x_regular(Vec2 x, Vec2 y) const override;
  double normal_derivative_green(Vec2 x0, double theta) const override;
  std::function<double(Vec2)> regular_part_source(Vec2 y) const override;

  /// One-sided representation Hhat(x, y) and its gradients.
  double regular_part_hat(Vec2 x, Vec2 y) const;
  Vec2 grad_first_hat(Vec2 x, Vec2 y) const;
  Vec2 grad_second_hat(Vec2 x, Vec2 y) const;

  const DiscreteOperator& op() const { return *op_; }
  const NumericGreenOptions& options() const { return options_; }
  double fd_step() const { return fd_step_; }
  std::size_t cache_size() const;

 private:
  struct Weights {
    Eigen::VectorXd value;
    Eigen::VectorXd dx;
    Eigen::VectorXd dy;
  };
  struct Image {
    double chi = 0.0;
    bool circle = false;
    Vec2 star;          // image point
    double offset = 0;  // log(|y - c| / R) for the circle image
  };
  using Entry = std::pair<std::uint64_t, std::uint64_t>;
  struct EntryHash {
    std::size_t operator()(const Entry& e) const { return e.first * 1000003u ^ e.second; }
  };
  using SparseCombo = std::vector<std::pair<int, double>>;

  void build_ghosts();
  std::shared_ptr<const Weights> weights(Vec2 x) const;
  std::string cache_path(const Entry& key) const;
  std::shared_ptr<const Weights> load_weights(const Entry& key) const;
  void store_weights(const Entry& key, const Weights& w) const;
  // Spline node weights at x expressed on (unknowns, links); order 0 value, 1 d/dx, 2 d/dy.
  void spline_functionals(Vec2 x, Eigen::MatrixXd& on_unknowns, Eigen::MatrixXd& on_links) const;
  Image image(Vec2 y) const;
  static double image_value(const Image& im, Vec2 x);
  double data(const Image& im, std::size_t link, Vec2 y) const;
  double subtraction_part(const Weights& w, Vec2 x, Vec2 y) const;

  NumericGreenOptions options_;
  OperatorPtr op_;
  double fd_step_ = 0.0;
  double tube_ = 0.0;
  std::string disk_cache_;  // directory, empty when disabled
  std::uint64_t signature_ = 0;
  std::vector<SparseCombo> node_combo_;  // per grid node: value as a combination of unknowns/links
  std::vector<std::uint8_t> node_known_;

  mutable std::mutex cache_mutex_;
  mutable std::list<std::pair<Entry, std::shared_ptr<const Weights>>> lru_;
  mutable std::unordered_map<Entry, decltype(lru_)::iterator, EntryHash> index_;
};

struct GreenOptions {
  enum class Method { Auto, ClosedForm, Numeric };
  Method method = Method::Auto;
  NumericGreenOptions numeric;
};

/// Closed form on disks (unless Numeric is requested), the grid evaluator elsewhere.
GreenPtr make_green(const DomainShape& shape, const GreenOptions& options = {});

}  // namespace vortexlab
