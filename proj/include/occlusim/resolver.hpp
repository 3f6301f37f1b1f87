#pragma once

#include <span>
#include <vector>

#include "occlusim/geometry.hpp"

namespace occlusim {

/// Rotation sense: counterclockwise is positive.
enum class Turn : int { cw = -1, none = 0, ccw = 1 };

inline int sign_of(Turn t) { return static_cast<int>(t); }

struct ResolutionConstraints {
  double max_rotation = kPi / 2.0;
  double max_translation = 1.0;
  double rotation_step = deg_to_rad(1.0);
  double translation_step = 0.05;
  Turn direction_lock = Turn::none;

  /// Throws invalid_input when a bound or step is out of range.
  void validate() const;

  int rotation_count() const;
  int translation_count() const;
};

/// Obstacles are borrowed; they must outlive the call that consumes the query.
struct ResolutionQuery {
  Vec2 origin;
  OrientedRect desk;
  std::span<const Circle> obstacles;
  ResolutionConstraints constraints;
};

enum class ResolutionStatus { resolved, already_free, unresolved };

const char* to_string(ResolutionStatus s);

struct ResolutionOutcome {
  ResolutionStatus status = ResolutionStatus::unresolved;
  double rotation_delta = 0.0;
  double translation_delta = 0.0;
  OrientedRect resolved_desk;
  double cost = 0.0;

  bool usable() const { return status != ResolutionStatus::unresolved; }
  bool operator==(const ResolutionOutcome&) const = default;
};

/// Rotates the desk about origin by d_theta, then slides it d_trans toward origin.
OrientedRect candidate_desk(const OrientedRect& desk, Vec2 origin, double d_theta,
                            double d_trans);

double resolution_cost(double d_theta, double d_trans, const ResolutionConstraints& c);

/// Grid coordinates: rotation index in [-rotation_count, rotation_count],
/// translation index in [0, translation_count].
double grid_rotation(int index, const ResolutionConstraints& c);
double grid_translation(int index, const ResolutionConstraints& c);

struct GridCell {
  int rotation_index = 0;
  int translation_index = 0;
  double rotation = 0.0;
  double translation = 0.0;
  double cost = 0.0;
};

/// Strict best-first order: cost, then smaller translation, then smaller
/// |rotation|, then counterclockwise before clockwise.
bool expands_before(const GridCell& a, const GridCell& b);

/// Every grid cell for the constraints (lock ignored) sorted by expands_before.
std::vector<GridCell> candidate_schedule(const ResolutionConstraints& c);

/// Nearest occlusion-free desk pose on the rotation/translation grid.
ResolutionOutcome find_occlusion_free(const ResolutionQuery& query);

/// Same contract as find_occlusion_free; candidates are tested in parallel
/// blocks of the best-first schedule. Results are identical.
ResolutionOutcome find_occlusion_free_parallel(const ResolutionQuery& query);

namespace reference {

/// Uniform-cost search with an explicit open list over grid neighbours.
/// Serial; kept as the readable reference for the schedule-based kernels.
ResolutionOutcome find_occlusion_free_search(const ResolutionQuery& query);

}  // namespace reference

}  // namespace occlusim
