#include "occlusim/resolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "occlusim/error.hpp"

namespace occlusim {

const char* to_string(ResolutionStatus s) {
  switch (s) {
    case ResolutionStatus::resolved: return "resolved";
    case ResolutionStatus::already_free: return "already_free";
    case ResolutionStatus::unresolved: return "unresolved";
  }
  return "unknown";
}

void ResolutionConstraints::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorKind::invalid_input, what); };
  if (!(max_rotation > 0.0) || !std::isfinite(max_rotation)) bad("max_rotation must be > 0");
  if (!(max_translation >= 0.0) || !std::isfinite(max_translation)) {
    bad("max_translation must be >= 0");
  }
  if (!(rotation_step > 0.0) || rotation_step > max_rotation) {
    bad("rotation_step must lie in (0, max_rotation]");
  }
  if (max_translation > 0.0 && (!(translation_step > 0.0) || translation_step > max_translation)) {
    bad("translation_step must lie in (0, max_translation]");
  }
}

namespace {
// Absorbs representation error when the maximum is an exact multiple of the step.
constexpr double kGridSlack = 1e-9;
}  // namespace

int ResolutionConstraints::rotation_count() const {
  return static_cast<int>(std::floor(max_rotation / rotation_step + kGridSlack));
}

int ResolutionConstraints::translation_count() const {
  if (max_translation == 0.0) return 0;
  return static_cast<int>(std::floor(max_translation / translation_step + kGridSlack));
}

OrientedRect candidate_desk(const OrientedRect& desk, Vec2 origin, double d_theta,
                            double d_trans) {
  const Vec2 rotated = rotate_about(desk.center, origin, d_theta);
  if (rotated == origin) {
    throw Error(ErrorKind::degenerate_geometry, "rotated desk center coincides with origin");
  }
  const Vec2 center = d_trans == 0.0 ? rotated : rotated + unit(origin - rotated) * d_trans;
  return {center, desk.half_width, desk.half_depth, desk.yaw + d_theta};
}

double resolution_cost(double d_theta, double d_trans, const ResolutionConstraints& c) {
  const double rot = std::abs(d_theta) / c.max_rotation;
  if (c.max_translation == 0.0) return rot;
  return rot + d_trans / c.max_translation;
}

double grid_rotation(int index, const ResolutionConstraints& c) {
  const double mag = std::min(std::abs(index) * c.rotation_step, c.max_rotation);
  return index < 0 ? -mag : mag;
}

double grid_translation(int index, const ResolutionConstraints& c) {
  return std::min(index * c.translation_step, c.max_translation);
}

bool expands_before(const GridCell& a, const GridCell& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.translation_index != b.translation_index) {
    return a.translation_index < b.translation_index;
  }
  const int ra = std::abs(a.rotation_index);
  const int rb = std::abs(b.rotation_index);
  if (ra != rb) return ra < rb;
  return a.rotation_index > b.rotation_index;
}

std::vector<GridCell> candidate_schedule(const ResolutionConstraints& c) {
  c.validate();
  const int nr = c.rotation_count();
  const int nt = c.translation_count();
  std::vector<GridCell> cells;
  cells.reserve(static_cast<std::size_t>(2 * nr + 1) * static_cast<std::size_t>(nt + 1));
  for (int j = 0; j <= nt; ++j) {
    for (int i = -nr; i <= nr; ++i) {
      const double rot = grid_rotation(i, c);
      const double tr = grid_translation(j, c);
      cells.push_back({i, j, rot, tr, resolution_cost(rot, tr, c)});
    }
  }
  std::sort(cells.begin(), cells.end(), expands_before);
  return cells;
}

namespace {

bool same_grid(const ResolutionConstraints& a, const ResolutionConstraints& b) {
  return a.max_rotation == b.max_rotation && a.max_translation == b.max_translation &&
         a.rotation_step == b.rotation_step && a.translation_step == b.translation_step;
}

// The schedule depends only on the grid; simulations call the resolver every
// frame with the same constraints, so each thread keeps its last schedule.
const std::vector<GridCell>& cached_schedule(const ResolutionConstraints& c) {
  thread_local std::optional<ResolutionConstraints> key;
  thread_local std::vector<GridCell> cells;
  if (!key || !same_grid(*key, c)) {
    cells = candidate_schedule(c);
    key = c;
  }
  return cells;
}

bool lock_admits(Turn lock, int rotation_index) {
  if (lock == Turn::none || rotation_index == 0) return true;
  return (rotation_index > 0) == (lock == Turn::ccw);
}

ResolutionOutcome outcome_for(const GridCell& cell, const OrientedRect& desk) {
  return {ResolutionStatus::resolved, cell.rotation, cell.translation, desk, cell.cost};
}

// Shared prologue: validates and handles the already-free case.
std::optional<ResolutionOutcome> trivial_outcome(const ResolutionQuery& q) {
  q.constraints.validate();
  if (q.origin == q.desk.center) {
    throw Error(ErrorKind::invalid_query, "origin coincides with the desk center");
  }
  if (!is_occluded(q.desk, q.obstacles)) {
    return ResolutionOutcome{ResolutionStatus::already_free, 0.0, 0.0, q.desk, 0.0};
  }
  return std::nullopt;
}

ResolutionOutcome unresolved(const ResolutionQuery& q) {
  return {ResolutionStatus::unresolved, 0.0, 0.0, q.desk, 0.0};
}

}  // namespace

ResolutionOutcome find_occlusion_free(const ResolutionQuery& q) {
  if (auto done = trivial_outcome(q)) return *done;
  const auto& schedule = cached_schedule(q.constraints);
  // Cell (0, 0) is first in the schedule and known to be occluded.
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    const GridCell& cell = schedule[k];
    if (!lock_admits(q.constraints.direction_lock, cell.rotation_index)) continue;
    const OrientedRect desk = candidate_desk(q.desk, q.origin, cell.rotation, cell.translation);
    if (!is_occluded(desk, q.obstacles)) return outcome_for(cell, desk);
  }
  return unresolved(q);
}

ResolutionOutcome find_occlusion_free_parallel(const ResolutionQuery& q) {
  if (auto done = trivial_outcome(q)) return *done;
  const auto& schedule = cached_schedule(q.constraints);
  const long n = static_cast<long>(schedule.size());
  constexpr long kBlock = 256;
  // Blocks are scanned in schedule order so the search can stop early; inside a
  // block the first free index wins, which keeps the answer independent of
  // thread count.
  for (long begin = 1; begin < n; begin += kBlock) {
    const long end = std::min(n, begin + kBlock);
    long first_free = end;
    int failed = 0;
#pragma omp parallel for schedule(static) reduction(min : first_free) reduction(max : failed)
    for (long k = begin; k < end; ++k) {
      const GridCell& cell = schedule[static_cast<std::size_t>(k)];
      if (!lock_admits(q.constraints.direction_lock, cell.rotation_index)) continue;
      try {
        const OrientedRect desk =
            candidate_desk(q.desk, q.origin, cell.rotation, cell.translation);
        if (!is_occluded(desk, q.obstacles) && k < first_free) first_free = k;
      } catch (...) {
        failed = 1;
      }
    }
    if (failed) {
      // Rerun serially so the caller sees the same exception the serial path raises.
      return find_occlusion_free(q);
    }
    if (first_free < end) {
      const GridCell& cell = schedule[static_cast<std::size_t>(first_free)];
      return outcome_for(cell,
                         candidate_desk(q.desk, q.origin, cell.rotation, cell.translation));
    }
  }
  return unresolved(q);
}

}  // namespace occlusim
