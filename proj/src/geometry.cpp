#include "occlusim/geometry.hpp"

#include <algorithm>
#include <string>

#include "occlusim/error.hpp"

namespace occlusim {

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw Error(ErrorKind::invalid_input, "non-finite angle");
  // remainder() is exact and lands in [-pi, pi]; fold the closed lower end over.
  double r = std::remainder(theta, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

Vec2::Vec2(double x_, double y_) : x(x_), y(y_) {
  if (!std::isfinite(x_) || !std::isfinite(y_)) {
    throw Error(ErrorKind::invalid_input, "non-finite vector component");
  }
}

Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

Vec2 rotate(Vec2 v, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Vec2 rotate_about(Vec2 p, Vec2 pivot, double theta) { return pivot + rotate(p - pivot, theta); }

Vec2 unit(Vec2 v) {
  const double n = v.norm();
  if (n == 0.0) throw Error(ErrorKind::degenerate_geometry, "direction of a zero vector");
  return {v.x / n, v.y / n};
}

Pose2::Pose2(Vec2 p, double yaw_) : position(p), yaw(normalize_angle(yaw_)) {}

OrientedRect::OrientedRect(Vec2 c, double hw, double hd, double yaw_)
    : center(c), half_width(hw), half_depth(hd), yaw(yaw_) {
  if (!(hw > 0.0) || !(hd > 0.0) || !std::isfinite(hw) || !std::isfinite(hd)) {
    throw Error(ErrorKind::invalid_input, "rectangle half extents must be positive");
  }
  if (!std::isfinite(yaw_)) throw Error(ErrorKind::invalid_input, "non-finite rectangle yaw");
}

std::array<Vec2, 4> OrientedRect::corners() const {
  const Vec2 d = depth_axis() * half_depth;
  const Vec2 w = width_axis() * half_width;
  return {center + d + w, center + d - w, center - d - w, center - d + w};
}

Circle::Circle(Vec2 c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorKind::invalid_input, "circle radius must be positive");
  }
}

FovWedge::FovWedge(Vec2 a, double heading_, double half_angle_, double range_)
    : apex(a), heading(heading_), half_angle(half_angle_), range(range_) {
  if (!(half_angle_ > 0.0 && half_angle_ < kPi)) {
    throw Error(ErrorKind::invalid_input, "fov half angle must lie in (0, pi)");
  }
  if (!(range_ > 0.0) || !std::isfinite(range_) || !std::isfinite(heading_)) {
    throw Error(ErrorKind::invalid_input, "fov range must be positive");
  }
}

namespace {

// Rectangle with its trig precomputed, so a batch of circle tests pays for
// cos/sin once.
struct RectFrame {
  const OrientedRect& rect;
  double c;
  double s;
  double reach;

  explicit RectFrame(const OrientedRect& r)
      : rect(r), c(std::cos(r.yaw)), s(std::sin(r.yaw)), reach(r.circumradius()) {}

  bool touches(const Circle& circle) const {
    const double rx = circle.center.x - rect.center.x;
    const double ry = circle.center.y - rect.center.y;
    const double bound = (reach + circle.radius) * (1.0 + 1e-12);
    if (rx * rx + ry * ry > bound * bound) return false;
    const double along_depth = c * rx + s * ry;
    const double along_width = -s * rx + c * ry;
    const double dx = along_depth - std::clamp(along_depth, -rect.half_depth, rect.half_depth);
    const double dy = along_width - std::clamp(along_width, -rect.half_width, rect.half_width);
    return dx * dx + dy * dy <= circle.radius * circle.radius;
  }
};

}  // namespace

bool rect_circle_intersects(const OrientedRect& rect, const Circle& circle) {
  return RectFrame(rect).touches(circle);
}

bool is_occluded(const OrientedRect& desk, std::span<const Circle> obstacles) {
  const RectFrame frame(desk);
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const Circle& c) { return frame.touches(c); });
}

bool segment_blocked(Vec2 a, Vec2 b, std::span<const Circle> obstacles) {
  if (a == b) throw Error(ErrorKind::invalid_input, "degenerate segment");
  const Vec2 ab = b - a;
  const double len_sq = ab.norm_sq();
  for (const Circle& c : obstacles) {
    const double t = std::clamp((c.center - a).dot(ab) / len_sq, 0.0, 1.0);
    const Vec2 closest{a.x + t * ab.x, a.y + t * ab.y};
    if ((c.center - closest).norm_sq() <= c.radius * c.radius) return true;
  }
  return false;
}

bool point_in_fov(const FovWedge& wedge, Vec2 p) {
  const Vec2 d = p - wedge.apex;
  const double dist = d.norm();
  if (dist > wedge.range) return false;
  if (dist == 0.0) return true;
  const double off = normalize_angle(std::atan2(d.y, d.x) - wedge.heading);
  return std::abs(off) <= wedge.half_angle;
}

bool rect_in_fov(const FovWedge& wedge, const OrientedRect& rect) {
  if (point_in_fov(wedge, rect.center)) return true;
  const auto cs = rect.corners();
  return std::any_of(cs.begin(), cs.end(), [&](Vec2 p) { return point_in_fov(wedge, p); });
}

}  // namespace occlusim
