#include "occlusim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "occlusim/error.hpp"
#include "occlusim/rng.hpp"

namespace occlusim {

Vec2 Aabb::clamp(Vec2 p) const {
  return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y)};
}

void SceneConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::invalid_input, what); };
  if (!(extent_x > 0.0) || !(extent_y > 0.0)) bad("scene extent must be positive");
  if (tree_count < 0) bad("tree_count must be >= 0");
  if (!(min_spacing >= 0.0)) bad("min_spacing must be >= 0");
  if (!(dbh_mean > 0.0) || !(dbh_sd > 0.0)) bad("dbh_mean and dbh_sd must be positive");
  if (target_count < 0 || target_count > tree_count) bad("target_count must lie in [0, tree_count]");
  if (!(target_dbh_inflation > 0.0)) bad("target_dbh_inflation must be positive");
  if (!(hop_min >= 0.0) || !(hop_min <= hop_max)) bad("hop_min must not exceed hop_max");
}

double Scene::max_tree_radius() const {
  double r = 0.0;
  for (const Circle& c : trees) r = std::max(r, c.radius);
  return r;
}

std::vector<Circle> Scene::obstacles_near(Vec2 point, double radius) const {
  std::vector<Circle> out;
  for (const Circle& c : trees) {
    const double reach = radius + c.radius;
    if ((c.center - point).norm_sq() <= reach * reach) out.push_back(c);
  }
  return out;
}

namespace {

// Uniform bucket grid over the scene used for the spacing test.
class SpacingGrid {
 public:
  SpacingGrid(const Aabb& bounds, double spacing) : bounds_(bounds), spacing_(spacing) {
    if (spacing_ > 0.0) {
      nx_ = std::max(1, static_cast<int>(std::ceil(bounds.width() / spacing_)));
      ny_ = std::max(1, static_cast<int>(std::ceil(bounds.height() / spacing_)));
      cells_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
    }
  }

  bool admits(Vec2 p) const {
    if (spacing_ <= 0.0) return true;
    const auto [cx, cy] = cell_of(p);
    for (int y = std::max(0, cy - 1); y <= std::min(ny_ - 1, cy + 1); ++y) {
      for (int x = std::max(0, cx - 1); x <= std::min(nx_ - 1, cx + 1); ++x) {
        for (Vec2 q : cells_[index(x, y)]) {
          if ((q - p).norm_sq() < spacing_ * spacing_) return false;
        }
      }
    }
    return true;
  }

  void insert(Vec2 p) {
    if (spacing_ <= 0.0) return;
    const auto [cx, cy] = cell_of(p);
    cells_[index(cx, cy)].push_back(p);
  }

 private:
  std::pair<int, int> cell_of(Vec2 p) const {
    const int cx = std::clamp(static_cast<int>((p.x - bounds_.min.x) / spacing_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((p.y - bounds_.min.y) / spacing_), 0, ny_ - 1);
    return {cx, cy};
  }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(x);
  }

  Aabb bounds_;
  double spacing_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<Vec2>> cells_;
};

std::vector<std::size_t> choose_targets(const SceneConfig& cfg, const Scene& scene, Rng& rng) {
  if (cfg.target_count == 0) return {};
  const double margin = std::min(5.0, 0.25 * std::min(cfg.extent_x, cfg.extent_y));
  const Aabb inner{{margin, margin}, {cfg.extent_x - margin, cfg.extent_y - margin}};
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < scene.trees.size(); ++i) {
    if (inner.contains(scene.trees[i].center)) eligible.push_back(i);
  }
  if (eligible.empty()) throw Error(ErrorKind::generation_failure, "no tree is eligible as a target");

  constexpr int kRestarts = 64;
  for (int attempt = 0; attempt < kRestarts; ++attempt) {
    std::vector<std::size_t> chain{
        eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)]};
    std::set<std::size_t> used(chain.begin(), chain.end());
    while (chain.size() < static_cast<std::size_t>(cfg.target_count)) {
      const Vec2 from = scene.trees[chain.back()].center;
      std::vector<std::size_t> next;
      for (std::size_t i : eligible) {
        const double d = (scene.trees[i].center - from).norm();
        if (!used.count(i) && d >= cfg.hop_min && d <= cfg.hop_max) next.push_back(i);
      }
      if (next.empty()) break;
      const std::size_t pick = next[std::uniform_int_distribution<std::size_t>(0, next.size() - 1)(rng)];
      chain.push_back(pick);
      used.insert(pick);
    }
    if (chain.size() == static_cast<std::size_t>(cfg.target_count)) return chain;
  }
  throw Error(ErrorKind::generation_failure, "could not chain targets within the hop range");
}

}  // namespace

Scene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  Scene scene;
  scene.bounds = {{0.0, 0.0}, {cfg.extent_x, cfg.extent_y}};
  Rng rng(cfg.seed);
  std::normal_distribution<double> dbh(cfg.dbh_mean, cfg.dbh_sd);
  SpacingGrid grid(scene.bounds, cfg.min_spacing);

  const long budget = 10L * cfg.tree_count;
  long attempts = 0;
  scene.trees.reserve(static_cast<std::size_t>(cfg.tree_count));
  while (scene.trees.size() < static_cast<std::size_t>(cfg.tree_count)) {
    const double radius = 0.5 * std::max(kMinDbh, dbh(rng));
    // Leave room for the target inflation so every disk stays inside the bounds.
    const double margin = radius * std::max(1.0, cfg.target_dbh_inflation);
    if (2.0 * margin >= std::min(cfg.extent_x, cfg.extent_y)) {
      throw Error(ErrorKind::generation_failure, "scene too small for its trees");
    }
    bool placed = false;
    while (!placed) {
      if (attempts++ >= budget) {
        throw Error(ErrorKind::generation_failure,
                    "placed " + std::to_string(scene.trees.size()) + " of " +
                        std::to_string(cfg.tree_count) + " trees before the retry budget ran out");
      }
      const Vec2 c{uniform(rng, margin, cfg.extent_x - margin),
                   uniform(rng, margin, cfg.extent_y - margin)};
      if (grid.admits(c)) {
        grid.insert(c);
        scene.trees.emplace_back(c, radius);
        placed = true;
      }
    }
  }

  scene.targets = choose_targets(cfg, scene, rng);
  for (std::size_t i : scene.targets) scene.trees[i].radius *= cfg.target_dbh_inflation;
  return scene;
}

std::string save_scene(const Scene& scene) {
  nlohmann::ordered_json j;
  j["bounds"] = {scene.bounds.width(), scene.bounds.height()};
  auto trees = nlohmann::ordered_json::array();
  for (const Circle& c : scene.trees) trees.push_back({c.center.x, c.center.y, c.radius});
  j["trees"] = std::move(trees);
  j["targets"] = scene.targets;
  return j.dump() + "\n";
}

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::parse_error, what); }

double number_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) parse_fail("field " + path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail("field " + path + ": not finite");
  return v;
}

}  // namespace

Scene load_scene(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(std::string("scene: ") + e.what());
  }
  if (!j.is_object()) parse_fail("scene: expected a JSON object");
  for (const auto& item : j.items()) {
    if (item.key() != "bounds" && item.key() != "trees" && item.key() != "targets") {
      parse_fail("unknown field '" + item.key() + "'");
    }
  }
  for (const char* key : {"bounds", "trees", "targets"}) {
    if (!j.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  }

  Scene scene;
  const auto& b = j["bounds"];
  if (!b.is_array() || b.size() != 2) parse_fail("field 'bounds': expected [w, h]");
  const double w = number_at(b[0], "'bounds'[0]");
  const double h = number_at(b[1], "'bounds'[1]");
  if (!(w > 0.0) || !(h > 0.0)) parse_fail("field 'bounds': extents must be positive");
  scene.bounds = {{0.0, 0.0}, {w, h}};

  const auto& trees = j["trees"];
  if (!trees.is_array()) parse_fail("field 'trees': expected an array");
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const std::string path = "'trees'[" + std::to_string(i) + "]";
    const auto& t = trees[i];
    if (!t.is_array() || t.size() != 3) parse_fail("field " + path + ": expected [x, y, r]");
    const double x = number_at(t[0], path + "[0]");
    const double y = number_at(t[1], path + "[1]");
    const double r = number_at(t[2], path + "[2]");
    if (!(r > 0.0)) parse_fail("field " + path + "[2]: radius must be positive");
    if (!scene.bounds.contains({x, y})) parse_fail("field " + path + ": center outside bounds");
    scene.trees.emplace_back(Vec2{x, y}, r);
  }

  const auto& targets = j["targets"];
  if (!targets.is_array()) parse_fail("field 'targets': expected an array");
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::string path = "'targets'[" + std::to_string(i) + "]";
    if (!targets[i].is_number_unsigned()) parse_fail("field " + path + ": expected an index");
    const auto idx = targets[i].get<std::size_t>();
    if (idx >= scene.trees.size()) parse_fail("field " + path + ": index out of range");
    if (!seen.insert(idx).second) parse_fail("field " + path + ": duplicate target");
    scene.targets.push_back(idx);
  }
  return scene;
}

void WorkspaceLayout::validate() const {
  if (!(desk_half_width > 0.0) || !(desk_half_depth > 0.0)) {
    throw Error(ErrorKind::invalid_input, "desk extents must be positive");
  }
  if (!(tracking_half_extent.x > 0.0) || !(tracking_half_extent.y > 0.0)) {
    throw Error(ErrorKind::invalid_input, "tracking space must have positive extent");
  }
  const Aabb room = tracking_space();
  if (!room.contains(home.position)) {
    throw Error(ErrorKind::invalid_input, "home pose lies outside the tracking space");
  }
  for (Vec2 c : desk_physical().corners()) {
    if (!room.contains(c)) throw Error(ErrorKind::invalid_input, "desk does not fit the tracking space");
  }
}

Aabb WorkspaceLayout::tracking_space() const { return {-tracking_half_extent, tracking_half_extent}; }

OrientedRect WorkspaceLayout::desk_physical() const {
  const Vec2 center = home.position + rotate(desk_offset_from_user, home.yaw);
  return {center, desk_half_width, desk_half_depth, home.yaw};
}

}  // namespace occlusim
