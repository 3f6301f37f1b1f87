#include "occlusim/mapping.hpp"

namespace occlusim {

Pose2 WorldMapping::to_virtual(const Pose2& p) const {
  return {to_virtual(p.position), p.yaw + rotation};
}

OrientedRect WorldMapping::to_virtual(const OrientedRect& r) const {
  return {to_virtual(r.center), r.half_width, r.half_depth, normalize_angle(r.yaw + rotation)};
}

WorldMapping WorldMapping::adjusted(const WorldAdjustment& adj, Vec2 pivot) const {
  WorldMapping m;
  m.rotation = normalize_angle(rotation + adj.rotation_about_user);
  m.translation = rotate_about(translation, pivot, adj.rotation_about_user) + adj.translation;
  return m;
}

WorldMapping WorldMapping::placing(const Pose2& physical, const Pose2& virtual_pose) {
  WorldMapping m;
  m.rotation = normalize_angle(virtual_pose.yaw - physical.yaw);
  m.translation = virtual_pose.position - rotate(physical.position, m.rotation);
  return m;
}

}  // namespace occlusim
