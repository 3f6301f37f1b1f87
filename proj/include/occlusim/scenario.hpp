#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "occlusim/geometry.hpp"

namespace occlusim {

/// Axis-aligned box [min, max], closed.
struct Aabb {
  Vec2 min;
  Vec2 max;

  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  Vec2 clamp(Vec2 p) const;
  Vec2 center() const { return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y)}; }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  bool operator==(const Aabb&) const = default;
};

struct SceneConfig {
  double extent_x = 250.0;
  double extent_y = 250.0;
  int tree_count = 2500;
  double min_spacing = 2.0;
  double dbh_mean = 0.40;
  double dbh_sd = 0.12;
  int target_count = 15;
  double target_dbh_inflation = 1.25;
  double hop_min = 10.0;  // distance between consecutive targets
  double hop_max = 25.0;
  std::uint64_t seed = 1;

  void validate() const;
};

inline constexpr double kMinDbh = 0.05;

struct Scene {
  std::vector<Circle> trees;
  Aabb bounds;
  std::vector<std::size_t> targets;

  const Circle& target_tree(std::size_t position) const { return trees.at(targets.at(position)); }
  double max_tree_radius() const;
  /// Trees whose disks come within `radius` of `point`.
  std::vector<Circle> obstacles_near(Vec2 point, double radius) const;

  bool operator==(const Scene&) const = default;
};

/// Seeded rejection sampling; throws generation_failure when the packing or
/// the target chain cannot be completed.
Scene generate_scene(const SceneConfig& config);

/// Scene file: {"bounds":[w,h],"trees":[[x,y,r],...],"targets":[i,...]}.
std::string save_scene(const Scene& scene);
/// Throws parse_error naming the offending field or input position.
Scene load_scene(const std::string& text);

/// Physical room: the desk, the user's home pose in front of it, and the
/// walkable tracking space centred on the room origin. The home pose is also
/// the origin of the workspace that teleport previews place in the world.
struct WorkspaceLayout {
  double desk_half_width = 0.8;
  double desk_half_depth = 0.4;
  Vec2 desk_offset_from_user{1.0, 0.0};  // in the home frame: x ahead, y left
  Vec2 tracking_half_extent{1.25, 2.0};
  Pose2 home{Vec2{0.0, -1.0}, kPi / 2.0};

  void validate() const;
  Aabb tracking_space() const;
  OrientedRect desk_physical() const;
};

}  // namespace occlusim
