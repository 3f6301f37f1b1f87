#pragma once

#include <span>

#include "occlusim/geometry.hpp"
#include "occlusim/mapping.hpp"
#include "occlusim/redirect.hpp"
#include "occlusim/resolver.hpp"
#include "occlusim/scenario.hpp"

namespace occlusim {

enum class TeleportStage {
  idle,
  target_specification,
  pre_travel_information,
  transition,
  post_travel_feedback,
};

const char* to_string(TeleportStage s);

/// idle -> target_specification -> pre_travel_information -> transition ->
/// post_travel_feedback -> idle. Target specification and pre-travel
/// information may share a frame, but they are still two transitions.
bool is_legal_transition(TeleportStage from, TeleportStage to);

class TeleportStageMachine {
 public:
  TeleportStage stage() const { return stage_; }
  /// Throws internal_error on an illegal transition.
  void advance(TeleportStage to);

 private:
  TeleportStage stage_ = TeleportStage::idle;
};

/// Where the user asks the workspace to go (virtual coordinates).
struct TeleportRequest {
  Vec2 target;
  double facing = 0.0;
};

struct PreviewState {
  Vec2 workspace_center;
  double workspace_yaw = 0.0;
  Pose2 avatar;
  OrientedRect desk_preview;
  double adjustment_rotation = 0.0;
  double adjustment_translation = 0.0;
  bool resolved = false;
  bool occluded_naive = false;  // desk occluded at the unadjusted placement
};

/// Exo-with-avatar preview: the workspace origin (layout.home) is placed at
/// the request; with ATR enabled an occluded desk is cleared by rotating the
/// whole preview about its center and sliding it toward the center.
/// Throws invalid_target when the request leaves `bounds`.
PreviewState make_preview(const TeleportRequest& request, const WorkspaceLayout& layout,
                          const Pose2& user_physical, std::span<const Circle> obstacles,
                          const Aabb& bounds, bool atr_enabled,
                          const ResolutionConstraints& constraints);

/// Re-applies recorded preview deltas to a naive placement; used by make_preview
/// and by trace replay so both produce identical bits.
PreviewState adjust_preview(const TeleportRequest& request, const WorkspaceLayout& layout,
                            const Pose2& user_physical, double rotation, double translation);

struct CommitResult {
  WorldMapping mapping;
  RedirectState redirect_state;
};

/// Moves the registration so the workspace lands where the preview shows it.
/// Throws internal_error if the preview is not a rigid image of the layout.
CommitResult commit_teleport(const PreviewState& preview, const WorkspaceLayout& layout,
                             const Pose2& user_physical, const RedirectState& redirect_state,
                             const ResolutionConstraints& constraints);

}  // namespace occlusim
