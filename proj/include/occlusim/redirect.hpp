#pragma once

#include <span>

#include "occlusim/geometry.hpp"
#include "occlusim/mapping.hpp"
#include "occlusim/resolver.hpp"

namespace occlusim {

struct GainConfig {
  double translation_gain = 0.06;
  double rotation_gain = 0.06;
  double curvature_gain = 2.6;  // degrees per meter

  void validate() const;
};

/// Two consecutive virtual poses of the user.
struct UserKinematics {
  Pose2 current;
  Pose2 previous;
};

struct RedirectState {
  Turn locked_direction = Turn::none;
  double remaining_rotation = 0.0;  // signed, radians
  double remaining_translation = 0.0;
  bool active = false;

  bool operator==(const RedirectState&) const = default;
};

RedirectState initial_redirect_state(const ResolutionConstraints& c);

/// Releases the rotation lock and restores the full budgets.
RedirectState on_teleport(const RedirectState& s, const ResolutionConstraints& c);

struct RedirectStep {
  RedirectState state;
  WorldAdjustment adjustment;
  bool desk_in_fov = false;
  bool degenerate = false;  // user stands on the desk center; nothing applied
  ResolutionStatus resolver_status = ResolutionStatus::unresolved;
  double frame_turn = 0.0;      // |normalize(yaw_t - yaw_{t-1})|
  double frame_distance = 0.0;  // |p_t - p_{t-1}|
};

/// Per-frame gain budget: rotation and curvature share one clamp against the
/// remaining rotation, translation is clamped against the remaining distance.
/// `away_from_desk` is the unit vector from desk to user.
WorldAdjustment redirect_increment(double frame_turn, double frame_distance, Turn lock,
                                   double remaining_rotation, double remaining_translation,
                                   Vec2 away_from_desk, const GainConfig& gains);

RedirectStep step(const RedirectState& state, const UserKinematics& kin,
                  const OrientedRect& desk_virtual, std::span<const Circle> obstacles,
                  const FovWedge& fov, const GainConfig& gains,
                  const ResolutionConstraints& constraints);

}  // namespace occlusim
