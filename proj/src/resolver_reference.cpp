#include <cstdlib>
#include <queue>
#include <vector>

#include "occlusim/error.hpp"
#include "occlusim/resolver.hpp"

namespace occlusim::reference {

ResolutionOutcome find_occlusion_free_search(const ResolutionQuery& q) {
  const ResolutionConstraints& c = q.constraints;
  c.validate();
  if (q.origin == q.desk.center) {
    throw Error(ErrorKind::invalid_query, "origin coincides with the desk center");
  }
  if (!is_occluded(q.desk, q.obstacles)) {
    return {ResolutionStatus::already_free, 0.0, 0.0, q.desk, 0.0};
  }

  const int nr = c.rotation_count();
  const int nt = c.translation_count();
  auto make_cell = [&](int i, int j) {
    const double rot = grid_rotation(i, c);
    const double tr = grid_translation(j, c);
    return GridCell{i, j, rot, tr, resolution_cost(rot, tr, c)};
  };
  auto admitted = [&](int i) {
    if (c.direction_lock == Turn::ccw) return i >= 0;
    if (c.direction_lock == Turn::cw) return i <= 0;
    return true;
  };

  // Cost grows with |i| and with j, so every cell is reached from (0, 0) along
  // a path of non-decreasing keys and the open list pops cells in global order.
  auto later = [](const GridCell& a, const GridCell& b) { return expands_before(b, a); };
  std::priority_queue<GridCell, std::vector<GridCell>, decltype(later)> open(later);
  std::vector<char> seen(static_cast<std::size_t>(2 * nr + 1) * static_cast<std::size_t>(nt + 1), 0);
  auto visit = [&](int i, int j) {
    if (i < -nr || i > nr || j > nt || !admitted(i)) return;
    char& s = seen[static_cast<std::size_t>(j) * static_cast<std::size_t>(2 * nr + 1) +
                   static_cast<std::size_t>(i + nr)];
    if (s) return;
    s = 1;
    open.push(make_cell(i, j));
  };

  visit(0, 0);
  while (!open.empty()) {
    const GridCell cell = open.top();
    open.pop();
    if (cell.rotation_index != 0 || cell.translation_index != 0) {
      const OrientedRect desk = candidate_desk(q.desk, q.origin, cell.rotation, cell.translation);
      if (!is_occluded(desk, q.obstacles)) {
        return {ResolutionStatus::resolved, cell.rotation, cell.translation, desk, cell.cost};
      }
    }
    const int i = cell.rotation_index;
    const int j = cell.translation_index;
    if (i >= 0) visit(i + 1, j);
    if (i <= 0) visit(i - 1, j);
    visit(i, j + 1);
  }
  return {ResolutionStatus::unresolved, 0.0, 0.0, q.desk, 0.0};
}

}  // namespace occlusim::reference
