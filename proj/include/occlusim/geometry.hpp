#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>

namespace occlusim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Wraps an angle into the half-open interval (-pi, pi].
double normalize_angle(double theta);

/// Planar vector in meters. Components are always finite.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  Vec2(double x_, double y_);

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) { return *this = *this + o; }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm_sq() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

Vec2 unit_from_angle(double theta);
/// Rotates v counterclockwise by theta about the origin.
Vec2 rotate(Vec2 v, double theta);
/// Rotates p counterclockwise by theta about pivot.
Vec2 rotate_about(Vec2 p, Vec2 pivot, double theta);
/// Unit vector of v; throws degenerate_geometry for the zero vector.
Vec2 unit(Vec2 v);

/// Position plus heading; yaw is kept normalized to (-pi, pi].
struct Pose2 {
  Vec2 position;
  double yaw = 0.0;

  Pose2() = default;
  Pose2(Vec2 p, double yaw_);

  bool operator==(const Pose2&) const = default;
};

// Footprint of a rectangular object. The yaw direction is the depth axis
// (the way a desk faces its user); the width axis is perpendicular to it.
struct OrientedRect {
  Vec2 center;
  double half_width = 0.5;
  double half_depth = 0.5;
  double yaw = 0.0;

  OrientedRect() = default;
  OrientedRect(Vec2 c, double hw, double hd, double yaw_);

  Vec2 depth_axis() const { return unit_from_angle(yaw); }
  Vec2 width_axis() const { return unit_from_angle(yaw + kPi / 2.0); }
  std::array<Vec2, 4> corners() const;
  double circumradius() const { return std::hypot(half_width, half_depth); }

  bool operator==(const OrientedRect&) const = default;
};

struct Circle {
  Vec2 center;
  double radius = 1.0;

  Circle() = default;
  Circle(Vec2 c, double r);

  bool operator==(const Circle&) const = default;
};

struct FovWedge {
  Vec2 apex;
  double heading = 0.0;
  double half_angle = kPi / 4.0;
  double range = 1.0;

  FovWedge() = default;
  FovWedge(Vec2 a, double heading_, double half_angle_, double range_);
};

/// Closed rectangle vs closed disk; tangency counts as contact.
bool rect_circle_intersects(const OrientedRect& rect, const Circle& circle);

bool is_occluded(const OrientedRect& desk, std::span<const Circle> obstacles);

/// True iff any circle touches the closed segment a-b. Throws invalid_input when a == b.
bool segment_blocked(Vec2 a, Vec2 b, std::span<const Circle> obstacles);

/// Closed wedge membership test for a single point.
bool point_in_fov(const FovWedge& wedge, Vec2 p);

/// True iff the rectangle's center or any of its corners lies inside the wedge.
bool rect_in_fov(const FovWedge& wedge, const OrientedRect& rect);

}  // namespace occlusim
