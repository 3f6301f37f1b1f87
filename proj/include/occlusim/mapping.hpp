#pragma once

#include "occlusim/geometry.hpp"

namespace occlusim {

/// Rigid correction applied to the physical-to-virtual registration: a
/// rotation about a pivot (the user's virtual position) followed by a
/// translation, both in virtual coordinates.
struct WorldAdjustment {
  double rotation_about_user = 0.0;
  Vec2 translation;

  bool is_identity() const {
    return rotation_about_user == 0.0 && translation.x == 0.0 && translation.y == 0.0;
  }
  bool operator==(const WorldAdjustment&) const = default;
};

/// Physical-room coordinates to virtual-world coordinates:
/// virtual = R(rotation) * physical + translation.
struct WorldMapping {
  double rotation = 0.0;
  Vec2 translation;

  Vec2 to_virtual(Vec2 p) const { return rotate(p, rotation) + translation; }
  Vec2 to_physical(Vec2 v) const { return rotate(v - translation, -rotation); }
  Pose2 to_virtual(const Pose2& p) const;
  OrientedRect to_virtual(const OrientedRect& r) const;

  /// Composes an adjustment (rotation about pivot, then translation) on the
  /// virtual side of this mapping.
  WorldMapping adjusted(const WorldAdjustment& adj, Vec2 pivot) const;

  /// The mapping that carries a physical pose onto a virtual pose.
  static WorldMapping placing(const Pose2& physical, const Pose2& virtual_pose);

  bool operator==(const WorldMapping&) const = default;
};

}  // namespace occlusim
