#include "occlusim/redirect.hpp"

#include <algorithm>
#include <cmath>

#include "occlusim/error.hpp"

namespace occlusim {

void GainConfig::validate() const {
  const bool ok = translation_gain >= 0.0 && rotation_gain >= 0.0 && curvature_gain >= 0.0 &&
                  std::isfinite(translation_gain) && std::isfinite(rotation_gain) &&
                  std::isfinite(curvature_gain);
  if (!ok) throw Error(ErrorKind::invalid_input, "gains must be finite and >= 0");
}

RedirectState initial_redirect_state(const ResolutionConstraints& c) {
  return {Turn::none, c.max_rotation, c.max_translation, false};
}

RedirectState on_teleport(const RedirectState&, const ResolutionConstraints& c) {
  return initial_redirect_state(c);
}

WorldAdjustment redirect_increment(double frame_turn, double frame_distance, Turn lock,
                                   double remaining_rotation, double remaining_translation,
                                   Vec2 away_from_desk, const GainConfig& gains) {
  WorldAdjustment adj;
  const double budget =
      gains.rotation_gain * frame_turn + deg_to_rad(gains.curvature_gain) * frame_distance;
  const double rot = std::clamp(budget, 0.0, std::abs(remaining_rotation));
  adj.rotation_about_user = rot * sign_of(lock);
  const double tr =
      std::clamp(gains.translation_gain * frame_distance, 0.0, std::max(remaining_translation, 0.0));
  if (tr > 0.0) adj.translation = away_from_desk * tr;
  return adj;
}

RedirectStep step(const RedirectState& state, const UserKinematics& kin,
                  const OrientedRect& desk_virtual, std::span<const Circle> obstacles,
                  const FovWedge& fov, const GainConfig& gains,
                  const ResolutionConstraints& constraints) {
  RedirectStep out;
  out.state = state;
  out.frame_turn = std::abs(normalize_angle(kin.current.yaw - kin.previous.yaw));
  out.frame_distance = (kin.current.position - kin.previous.position).norm();

  if (rect_in_fov(fov, desk_virtual)) {
    out.desk_in_fov = true;
    return out;
  }
  const Vec2 user = kin.current.position;
  if (user == desk_virtual.center) {
    out.degenerate = true;
    return out;
  }

  ResolutionConstraints locked = constraints;
  locked.direction_lock = state.locked_direction;
  const ResolutionOutcome target = find_occlusion_free({user, desk_virtual, obstacles, locked});
  out.resolver_status = target.status;
  if (target.status != ResolutionStatus::resolved) {
    out.state.active = false;
    return out;
  }

  Turn lock = state.locked_direction;
  if (target.rotation_delta > 0.0) lock = Turn::ccw;
  if (target.rotation_delta < 0.0) lock = Turn::cw;

  const double remaining_rot = std::abs(target.rotation_delta);
  const double remaining_tr = target.translation_delta;
  out.adjustment = redirect_increment(out.frame_turn, out.frame_distance, lock, remaining_rot,
                                      remaining_tr, unit(user - desk_virtual.center), gains);

  out.state.locked_direction = lock;
  out.state.remaining_rotation =
      (remaining_rot - std::abs(out.adjustment.rotation_about_user)) * sign_of(lock);
  out.state.remaining_translation =
      std::max(0.0, remaining_tr - out.adjustment.translation.norm());
  out.state.active = true;
  return out;
}

}  // namespace occlusim
