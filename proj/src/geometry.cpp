#include "vortexlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace vortexlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutsideTube: return "OutsideTube";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::TooCloseToBoundary: return "TooCloseToBoundary";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::Breakdown: return "Breakdown";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::BranchLost: return "BranchLost";
    case ErrorKind::NoneFound: return "NoneFound";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IOError: return "IOError";
  }
  return "Unknown";
}

namespace {

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

constexpr int kBoundarySamples = 720;

}  // namespace

DomainShape::DomainShape(Kind kind) : kind_(std::move(kind)) {
  if (const auto* d = std::get_if<Disk>(&kind_)) {
    if (!(d->radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "disk radius must be positive");
    bbox_ = {{d->center.x - d->radius, d->center.y - d->radius},
             {d->center.x + d->radius, d->center.y + d->radius}};
    inradius_ = d->radius;
    diameter_ = 2.0 * d->radius;
    return;
  }
  if (const auto* e = std::get_if<Ellipse>(&kind_)) {
    if (!(e->a > 0.0 && e->b > 0.0))
      throw Error(ErrorKind::InvalidArgument, "ellipse semi-axes must be positive");
    bbox_ = {{e->center.x - e->a, e->center.y - e->b}, {e->center.x + e->a, e->center.y + e->b}};
    inradius_ = std::min(e->a, e->b);
    diameter_ = 2.0 * std::max(e->a, e->b);
    return;
  }
  const auto& s = std::get<Star>(kind_);
  if (s.cos_coeffs.empty()) throw Error(ErrorKind::InvalidArgument, "star needs cos_coeffs[0]");
  constexpr int n = 8192;
  std::vector<Vec2> pts;
  pts.reserve(n);
  bbox_ = {{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()},
           {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()}};
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n;
    if (!(star_radius(t, 0) > 0.0))
      throw Error(ErrorKind::InvalidArgument, "star radial function must be positive");
    const Vec2 p = point(t);
    bbox_.lo.x = std::min(bbox_.lo.x, p.x);
    bbox_.lo.y = std::min(bbox_.lo.y, p.y);
    bbox_.hi.x = std::max(bbox_.hi.x, p.x);
    bbox_.hi.y = std::max(bbox_.hi.y, p.y);
    if (k % 8 == 0) pts.push_back(p);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      diameter_ = std::max(diameter_, norm(pts[i] - pts[j]));

  // Inradius: coarse scan of the distance function followed by a shrinking pattern search.
  constexpr int m = 41;
  Vec2 best = s.center;
  double best_d = distance_to_boundary(best);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Vec2 x{bbox_.lo.x + (bbox_.hi.x - bbox_.lo.x) * i / (m - 1),
                   bbox_.lo.y + (bbox_.hi.y - bbox_.lo.y) * j / (m - 1)};
      if (!contains(x)) continue;
      const double d = distance_to_boundary(x);
      if (d > best_d) { best_d = d; best = x; }
    }
  }
  double step = (bbox_.hi.x - bbox_.lo.x) / (m - 1);
  while (step > 1e-10 * diameter_) {
    bool moved = false;
    for (const Vec2 dir : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}}) {
      const Vec2 x = best + step * dir;
      if (!contains(x)) continue;
      const double d = distance_to_boundary(x);
      if (d > best_d) { best_d = d; best = x; moved = true; }
    }
    if (!moved) step *= 0.5;
  }
  inradius_ = best_d;
}

const char* DomainShape::kind_name() const {
  if (std::holds_alternative<Disk>(kind_)) return "disk";
  if (std::holds_alternative<Ellipse>(kind_)) return "ellipse";
  return "star";
}

Vec2 DomainShape::center() const {
  return std::visit([](const auto& k) { return k.center; }, kind_);
}

double DomainShape::star_radius(double theta, int derivative) const {
  const auto& s = std::get<Star>(kind_);
  double r = derivative == 0 ? s.cos_coeffs[0] : 0.0;
  const std::size_t kmax = std::max(s.cos_coeffs.size(), s.sin_coeffs.size() + 1);
  for (std::size_t k = 1; k < kmax; ++k) {
    const double a = k < s.cos_coeffs.size() ? s.cos_coeffs[k] : 0.0;
    const double b = k - 1 < s.sin_coeffs.size() ? s.sin_coeffs[k - 1] : 0.0;
    const double kd = static_cast<double>(k);
    const double c = std::cos(kd * theta);
    const double sn = std::sin(kd * theta);
    switch (derivative) {
      case 0: r += a * c + b * sn; break;
      case 1: r += kd * (-a * sn + b * c); break;
      default: r += -kd * kd * (a * c + b * sn); break;
    }
  }
  return r;
}

bool DomainShape::contains(Vec2 x) const { return level(x) < 0.0; }

double DomainShape::level(Vec2 x) const {
  if (const auto* d = std::get_if<Disk>(&kind_)) return norm(x - d->center) - d->radius;
  if (const auto* e = std::get_if<Ellipse>(&kind_)) {
    const double u = (x.x - e->center.x) / e->a;
    const double v = (x.y - e->center.y) / e->b;
    return u * u + v * v - 1.0;
  }
  const auto& s = std::get<Star>(kind_);
  const Vec2 r = x - s.center;
  return norm(r) - star_radius(std::atan2(r.y, r.x), 0);
}

Vec2 DomainShape::point(double t) const {
  if (const auto* d = std::get_if<Disk>(&kind_))
    return d->center + d->radius * Vec2{std::cos(t), std::sin(t)};
  if (const auto* e = std::get_if<Ellipse>(&kind_))
    return e->center + Vec2{e->a * std::cos(t), e->b * std::sin(t)};
  const auto& s = std::get<Star>(kind_);
  return s.center + star_radius(t, 0) * Vec2{std::cos(t), std::sin(t)};
}

Vec2 DomainShape::tangent(double t) const {
  if (const auto* d = std::get_if<Disk>(&kind_)) return d->radius * Vec2{-std::sin(t), std::cos(t)};
  if (const auto* e = std::get_if<Ellipse>(&kind_)) return {-e->a * std::sin(t), e->b * std::cos(t)};
  const Vec2 er{std::cos(t), std::sin(t)};
  const Vec2 et{-std::sin(t), std::cos(t)};
  return star_radius(t, 1) * er + star_radius(t, 0) * et;
}

Vec2 DomainShape::tangent_prime(double t) const {
  if (const auto* d = std::get_if<Disk>(&kind_)) return -d->radius * Vec2{std::cos(t), std::sin(t)};
  if (const auto* e = std::get_if<Ellipse>(&kind_)) return {-e->a * std::cos(t), -e->b * std::sin(t)};
  const Vec2 er{std::cos(t), std::sin(t)};
  const Vec2 et{-std::sin(t), std::cos(t)};
  const double r = star_radius(t, 0);
  return (star_radius(t, 2) - r) * er + 2.0 * star_radius(t, 1) * et;
}

Vec2 DomainShape::normal(double t) const {
  const Vec2 tg = tangent(t);
  return Vec2{tg.y, -tg.x} / norm(tg);
}

double DomainShape::curvature(double t) const {
  const Vec2 d1 = tangent(t);
  const Vec2 d2 = tangent_prime(t);
  const double s = norm(d1);
  return cross(d1, d2) / (s * s * s);
}

double DomainShape::theta_of(Vec2 bp) const {
  if (const auto* e = std::get_if<Ellipse>(&kind_))
    return wrap_angle(std::atan2((bp.y - e->center.y) / e->b, (bp.x - e->center.x) / e->a));
  const Vec2 r = bp - center();
  return wrap_angle(std::atan2(r.y, r.x));
}

double DomainShape::area() const {
  if (const auto* d = std::get_if<Disk>(&kind_)) return kPi * d->radius * d->radius;
  if (const auto* e = std::get_if<Ellipse>(&kind_)) return kPi * e->a * e->b;
  const auto& s = std::get<Star>(kind_);
  double a = kPi * s.cos_coeffs[0] * s.cos_coeffs[0];
  for (std::size_t k = 1; k < s.cos_coeffs.size(); ++k) a += 0.5 * kPi * s.cos_coeffs[k] * s.cos_coeffs[k];
  for (double b : s.sin_coeffs) a += 0.5 * kPi * b * b;
  return a;
}

bool DomainShape::is_convex(int samples) const {
  for (int k = 0; k < samples; ++k)
    if (curvature(kTwoPi * k / samples) < 0.0) return false;
  return true;
}

double DomainShape::project_theta(Vec2 x, double theta) const {
  for (int it = 0; it < 60; ++it) {
    const Vec2 r = point(theta) - x;
    const Vec2 d1 = tangent(theta);
    const Vec2 d2 = tangent_prime(theta);
    const double g = dot(r, d1);
    // Stationary already (also covers flat cases such as the centre of a disk).
    if (std::abs(g) <= 1e-15 * (norm(r) * norm(d1) + 1e-300)) return theta;
    const double hss = norm2(d1) + dot(r, d2);
    double step = hss > 0.0 ? -g / hss : (g > 0.0 ? -0.05 : 0.05);
    step = std::clamp(step, -0.2, 0.2);
    theta += step;
    if (std::abs(step) < 1e-14) return theta;
    if (std::abs(step) < 1e-12 && it > 3) return theta;
  }
  throw Error(ErrorKind::NoConvergence, "boundary projection did not converge");
}

BoundaryData DomainShape::nearest_boundary(Vec2 x) const {
  std::array<double, kBoundarySamples> dist{};
  for (int k = 0; k < kBoundarySamples; ++k) dist[k] = norm2(point(kTwoPi * k / kBoundarySamples) - x);
  // Polish every sampled local minimum among the three smallest.
  std::vector<int> minima;
  for (int k = 0; k < kBoundarySamples; ++k) {
    const double prev = dist[(k + kBoundarySamples - 1) % kBoundarySamples];
    const double next = dist[(k + 1) % kBoundarySamples];
    if (dist[k] <= prev && dist[k] <= next) minima.push_back(k);
  }
  std::sort(minima.begin(), minima.end(), [&](int a, int b) { return dist[a] < dist[b]; });
  if (minima.size() > 3) minima.resize(3);

  BoundaryData best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int k : minima) {
    const double theta = wrap_angle(project_theta(x, kTwoPi * k / kBoundarySamples));
    const Vec2 p = point(theta);
    const double d = norm(p - x);
    if (d < best.distance) {
      best.distance = d;
      best.theta = theta;
      best.projection = p;
    }
  }
  best.point = x;
  best.normal = normal(best.theta);
  best.curvature = curvature(best.theta);
  best.reflection = x + 2.0 * best.distance * best.normal;
  return best;
}

double DomainShape::crossing_fraction(Vec2 inside, Vec2 outside) const {
  double lo = 0.0;
  double hi = 1.0;
  const Vec2 dir = outside - inside;
  for (int it = 0; it < 80 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contains(inside + mid * dir)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

BoundaryData boundary_data(const DomainShape& shape, Vec2 x, double tube) {
  if (tube < 0.0) tube = shape.tube_width();
  if (!shape.contains(x)) throw Error(ErrorKind::OutsideDomain, "point is not inside the domain");
  BoundaryData bd = shape.nearest_boundary(x);
  if (bd.distance > tube)
    throw Error(ErrorKind::OutsideTube, "distance " + std::to_string(bd.distance) +
                                            " exceeds tube width " + std::to_string(tube));
  return bd;
}

}  // namespace vortexlab
