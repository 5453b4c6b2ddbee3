#pragma once

#include <variant>
#include <vector>

#include "vortexlab/common.hpp"

namespace vortexlab {

struct Disk {
  Vec2 center;
  double radius = 1.0;
};

struct Ellipse {
  Vec2 center;
  double a = 1.0;  // semi-axis along x
  double b = 1.0;  // semi-axis along y
};

/// Star-shaped domain r < r(theta) about `center`, with
/// r(theta) = cos_coeffs[0] + sum_k cos_coeffs[k] cos(k theta) + sin_coeffs[k-1] sin(k theta).
struct Star {
  Vec2 center;
  std::vector<double> cos_coeffs{1.0};
  std::vector<double> sin_coeffs;
};

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
};

/// Geometry of an interior point near the boundary.
struct BoundaryData {
  Vec2 point;
  double distance = 0.0;
  Vec2 projection;
  double theta = 0.0;  // boundary parameter of the projection
  Vec2 normal;         // outward unit normal at the projection
  double curvature = 0.0;
  Vec2 reflection;     // point + 2 distance normal
};

/// Smooth bounded simply-connected planar domain. Boundary is parametrized by
/// theta in [0, 2 pi), counterclockwise. Immutable once constructed.
class DomainShape {
 public:
  using Kind = std::variant<Disk, Ellipse, Star>;

  explicit DomainShape(Kind kind);

  static DomainShape disk(Vec2 center, double radius) { return DomainShape(Disk{center, radius}); }
  static DomainShape ellipse(Vec2 center, double a, double b) {
    return DomainShape(Ellipse{center, a, b});
  }

  const Kind& kind() const { return kind_; }
  bool is_disk() const { return std::holds_alternative<Disk>(kind_); }
  const char* kind_name() const;

  bool contains(Vec2 x) const;
  /// Smooth function, negative inside and positive outside; its zero set is the boundary.
  double level(Vec2 x) const;

  Vec2 point(double theta) const;
  Vec2 tangent(double theta) const;        // d point / d theta
  Vec2 tangent_prime(double theta) const;  // d^2 point / d theta^2
  Vec2 normal(double theta) const;
  double curvature(double theta) const;
  /// Boundary parameter of the ray direction from the center (exact for a point on the boundary).
  double theta_of(Vec2 boundary_point) const;

  BoundingBox bounding_box() const { return bbox_; }
  Vec2 center() const;
  double inradius() const { return inradius_; }
  double diameter() const { return diameter_; }
  double area() const;
  /// Default tubular-neighbourhood width used by boundary_data.
  double tube_width() const { return 0.2 * inradius_; }

  /// True when the sampled curvature is non-negative everywhere.
  bool is_convex(int samples = 1024) const;

  /// Nearest boundary point by Newton on the parametrization (global search, no tube limit).
  BoundaryData nearest_boundary(Vec2 x) const;
  double distance_to_boundary(Vec2 x) const { return nearest_boundary(x).distance; }

  /// Fraction t in (0, 1] such that inside + t (outside - inside) lies on the boundary.
  double crossing_fraction(Vec2 inside, Vec2 outside) const;

 private:
  double star_radius(double theta, int derivative) const;
  double project_theta(Vec2 x, double theta0) const;

  Kind kind_;
  BoundingBox bbox_;
  double inradius_ = 0.0;
  double diameter_ = 0.0;
};

inline bool contains(const DomainShape& shape, Vec2 x) { return shape.contains(x); }

/// Projection, normal, curvature and reflection of an interior point within the tube of width
/// `tube` (defaults to DomainShape::tube_width()). Throws OutsideTube / OutsideDomain / NoConvergence.
BoundaryData boundary_data(const DomainShape& shape, Vec2 x, double tube = -1.0);

}  // namespace vortexlab
