#include "occlusim/teleport.hpp"

#include <cmath>

#include "occlusim/error.hpp"

namespace occlusim {

const char* to_string(TeleportStage s) {
  switch (s) {
    case TeleportStage::idle: return "idle";
    case TeleportStage::target_specification: return "target_specification";
    case TeleportStage::pre_travel_information: return "pre_travel_information";
    case TeleportStage::transition: return "transition";
    case TeleportStage::post_travel_feedback: return "post_travel_feedback";
  }
  return "unknown";
}

bool is_legal_transition(TeleportStage from, TeleportStage to) {
  using S = TeleportStage;
  switch (from) {
    case S::idle: return to == S::target_specification;
    case S::target_specification: return to == S::pre_travel_information;
    case S::pre_travel_information: return to == S::transition;
    case S::transition: return to == S::post_travel_feedback;
    case S::post_travel_feedback: return to == S::idle;
  }
  return false;
}

void TeleportStageMachine::advance(TeleportStage to) {
  if (!is_legal_transition(stage_, to)) {
    throw Error(ErrorKind::internal_error, std::string("illegal teleport transition ") +
                                               to_string(stage_) + " -> " + to_string(to));
  }
  stage_ = to;
}

namespace {

WorldMapping placement_of(const WorkspaceLayout& layout, Vec2 center, double yaw) {
  return WorldMapping::placing(layout.home, Pose2(center, yaw));
}

}  // namespace

PreviewState adjust_preview(const TeleportRequest& request, const WorkspaceLayout& layout,
                            const Pose2& user_physical, double rotation, double translation) {
  const WorldMapping naive = placement_of(layout, request.target, request.facing);
  const OrientedRect desk = naive.to_virtual(layout.desk_physical());
  const Pose2 avatar = naive.to_virtual(user_physical);

  PreviewState p;
  p.adjustment_rotation = rotation;
  p.adjustment_translation = translation;
  if (rotation == 0.0 && translation == 0.0) {
    p.workspace_center = request.target;
    p.workspace_yaw = normalize_angle(request.facing);
    p.avatar = avatar;
    p.desk_preview = desk;
    return p;
  }
  // Same construction as candidate_desk, applied to every part of the preview.
  const Vec2 pivot = request.target;
  const Vec2 rotated_desk = rotate_about(desk.center, pivot, rotation);
  const Vec2 shift = translation == 0.0 ? Vec2{} : unit(pivot - rotated_desk) * translation;
  p.workspace_center = pivot + shift;
  p.workspace_yaw = normalize_angle(request.facing + rotation);
  p.avatar = Pose2(rotate_about(avatar.position, pivot, rotation) + shift, avatar.yaw + rotation);
  p.desk_preview = candidate_desk(desk, pivot, rotation, translation);
  return p;
}

PreviewState make_preview(const TeleportRequest& request, const WorkspaceLayout& layout,
                          const Pose2& user_physical, std::span<const Circle> obstacles,
                          const Aabb& bounds, bool atr_enabled,
                          const ResolutionConstraints& constraints) {
  if (!bounds.contains(request.target)) {
    throw Error(ErrorKind::invalid_target, "teleport target outside the scene bounds");
  }
  PreviewState naive = adjust_preview(request, layout, user_physical, 0.0, 0.0);
  naive.occluded_naive = is_occluded(naive.desk_preview, obstacles);
  naive.resolved = !naive.occluded_naive;
  if (!atr_enabled || !naive.occluded_naive) return naive;

  ResolutionConstraints c = constraints;
  c.direction_lock = Turn::none;
  const ResolutionOutcome out = find_occlusion_free({request.target, naive.desk_preview, obstacles, c});
  if (out.status != ResolutionStatus::resolved) return naive;

  PreviewState adjusted =
      adjust_preview(request, layout, user_physical, out.rotation_delta, out.translation_delta);
  adjusted.occluded_naive = true;
  adjusted.resolved = true;
  return adjusted;
}

CommitResult commit_teleport(const PreviewState& preview, const WorkspaceLayout& layout,
                             const Pose2& user_physical, const RedirectState& redirect_state,
                             const ResolutionConstraints& constraints) {
  const WorldMapping m = placement_of(layout, preview.workspace_center, preview.workspace_yaw);
  constexpr double kTol = 1e-9;
  const OrientedRect desk = m.to_virtual(layout.desk_physical());
  const Pose2 avatar = m.to_virtual(user_physical);
  const bool rigid = (desk.center - preview.desk_preview.center).norm() <= kTol &&
                     std::abs(normalize_angle(desk.yaw - preview.desk_preview.yaw)) <= kTol &&
                     (avatar.position - preview.avatar.position).norm() <= kTol &&
                     std::abs(normalize_angle(avatar.yaw - preview.avatar.yaw)) <= kTol;
  if (!rigid) {
    throw Error(ErrorKind::internal_error, "preview is not a rigid placement of the workspace");
  }
  return {m, on_teleport(redirect_state, constraints)};
}

}  // namespace occlusim
