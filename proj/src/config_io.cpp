#include "occlusim/config_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "occlusim/error.hpp"
#include "occlusim/rng.hpp"

namespace occlusim {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::parse_error, what); }

// Reads the fields of one JSON object, rejecting anything it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) parse_fail(where_ + ": expected a JSON object");
  }

  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& item : j_.items()) {
      if (!known_.count(item.key())) parse_fail("unknown field '" + path(item.key()) + "'");
    }
  }

  void number(const char* key, double& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) parse_fail("field '" + path(key) + "': expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) parse_fail("field '" + path(key) + "': not finite");
    }
  }

  void degrees(const char* key, double& radians) {
    if (find(key)) {
      double deg = 0.0;
      number(key, deg);
      radians = deg_to_rad(deg);
    }
  }

  void integer(const char* key, int& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) parse_fail("field '" + path(key) + "': expected an integer");
      out = v->get<int>();
    }
  }

  void seed(const char* key, std::uint64_t& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_unsigned()) parse_fail("field '" + path(key) + "': expected an unsigned integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) parse_fail("field '" + path(key) + "': expected true or false");
      out = v->get<bool>();
    }
  }

  void text(const char* key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) parse_fail("field '" + path(key) + "': expected a string");
      out = v->get<std::string>();
    }
  }

  void pair(const char* key, Vec2& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        parse_fail("field '" + path(key) + "': expected [x, y]");
      }
      try {
        out = Vec2((*v)[0].get<double>(), (*v)[1].get<double>());
      } catch (const Error&) {
        parse_fail("field '" + path(key) + "': not finite");
      }
    }
  }

  const nlohmann::json* find(const char* key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> known_;
};

template <class T>
T validated(T value, const std::string& where) {
  try {
    value.validate();
  } catch (const Error& e) {
    parse_fail(where + ": " + e.detail());
  }
  return value;
}

}  // namespace

SceneConfig scene_config_from_json(const nlohmann::json& j) {
  SceneConfig c;
  {
    ObjectReader r(j, "scene");
    Vec2 extent{c.extent_x, c.extent_y};
    r.pair("extent", extent);
    c.extent_x = extent.x;
    c.extent_y = extent.y;
    r.integer("tree_count", c.tree_count);
    r.number("min_spacing", c.min_spacing);
    r.number("dbh_mean", c.dbh_mean);
    r.number("dbh_sd", c.dbh_sd);
    r.integer("target_count", c.target_count);
    r.number("target_dbh_inflation", c.target_dbh_inflation);
    r.number("hop_min", c.hop_min);
    r.number("hop_max", c.hop_max);
    r.seed("seed", c.seed);
  }
  return validated(c, "scene");
}

nlohmann::ordered_json to_json(const SceneConfig& c) {
  nlohmann::ordered_json j;
  j["extent"] = {c.extent_x, c.extent_y};
  j["tree_count"] = c.tree_count;
  j["min_spacing"] = c.min_spacing;
  j["dbh_mean"] = c.dbh_mean;
  j["dbh_sd"] = c.dbh_sd;
  j["target_count"] = c.target_count;
  j["target_dbh_inflation"] = c.target_dbh_inflation;
  j["hop_min"] = c.hop_min;
  j["hop_max"] = c.hop_max;
  j["seed"] = c.seed;
  return j;
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig c;
  {
    ObjectReader r(j, "agent");
    r.number("dt", c.dt);
    r.number("walk_speed", c.walk_speed);
    r.degrees("turn_rate_deg_s", c.turn_rate);
    r.number("orbit_clearance", c.orbit_clearance);
    r.number("survey_laps", c.survey_laps);
    r.degrees("fov_half_angle_deg", c.fov_half_angle);
    r.number("fov_range", c.fov_range);
    r.number("pointing_noise_sd_deg", c.pointing_noise_sd);
    r.number("interaction_distance", c.interaction_distance);
    r.number("approach_gap_min", c.approach_gap_min);
    r.number("teleport_hop_min", c.teleport_hop_min);
    r.number("teleport_hop_max", c.teleport_hop_max);
    r.number("teleport_dwell", c.teleport_dwell);
    r.boolean("force_gaze_at_desk", c.force_gaze_at_desk);
  }
  return validated(c, "agent");
}

nlohmann::ordered_json to_json(const AgentConfig& c) {
  nlohmann::ordered_json j;
  j["dt"] = c.dt;
  j["walk_speed"] = c.walk_speed;
  j["turn_rate_deg_s"] = rad_to_deg(c.turn_rate);
  j["orbit_clearance"] = c.orbit_clearance;
  j["survey_laps"] = c.survey_laps;
  j["fov_half_angle_deg"] = rad_to_deg(c.fov_half_angle);
  j["fov_range"] = c.fov_range;
  j["pointing_noise_sd_deg"] = c.pointing_noise_sd;
  j["interaction_distance"] = c.interaction_distance;
  j["approach_gap_min"] = c.approach_gap_min;
  j["teleport_hop_min"] = c.teleport_hop_min;
  j["teleport_hop_max"] = c.teleport_hop_max;
  j["teleport_dwell"] = c.teleport_dwell;
  j["force_gaze_at_desk"] = c.force_gaze_at_desk;
  return j;
}

GainConfig gain_config_from_json(const nlohmann::json& j) {
  GainConfig c;
  {
    ObjectReader r(j, "gains");
    r.number("translation_gain", c.translation_gain);
    r.number("rotation_gain", c.rotation_gain);
    r.number("curvature_gain_deg_per_m", c.curvature_gain);
  }
  return validated(c, "gains");
}

nlohmann::ordered_json to_json(const GainConfig& c) {
  nlohmann::ordered_json j;
  j["translation_gain"] = c.translation_gain;
  j["rotation_gain"] = c.rotation_gain;
  j["curvature_gain_deg_per_m"] = c.curvature_gain;
  return j;
}

namespace {

Turn turn_from_string(const std::string& s) {
  if (s == "none") return Turn::none;
  if (s == "ccw") return Turn::ccw;
  if (s == "cw") return Turn::cw;
  parse_fail("unknown rotation lock '" + s + "' (expected none, cw or ccw)");
}

const char* turn_name(Turn t) {
  switch (t) {
    case Turn::ccw: return "ccw";
    case Turn::cw: return "cw";
    case Turn::none: return "none";
  }
  return "none";
}

}  // namespace

ResolutionConstraints constraints_from_json(const nlohmann::json& j) {
  ResolutionConstraints c;
  {
    ObjectReader r(j, "constraints");
    r.degrees("max_rotation_deg", c.max_rotation);
    r.number("max_translation", c.max_translation);
    r.degrees("rotation_step_deg", c.rotation_step);
    r.number("translation_step", c.translation_step);
    std::string lock = "none";
    r.text("direction_lock", lock);
    c.direction_lock = turn_from_string(lock);
  }
  return validated(c, "constraints");
}

nlohmann::ordered_json to_json(const ResolutionConstraints& c) {
  nlohmann::ordered_json j;
  j["max_rotation_deg"] = rad_to_deg(c.max_rotation);
  j["max_translation"] = c.max_translation;
  j["rotation_step_deg"] = rad_to_deg(c.rotation_step);
  j["translation_step"] = c.translation_step;
  j["direction_lock"] = turn_name(c.direction_lock);
  return j;
}

WorkspaceLayout layout_from_json(const nlohmann::json& j) {
  WorkspaceLayout l;
  {
    ObjectReader r(j, "layout");
    r.number("desk_half_width", l.desk_half_width);
    r.number("desk_half_depth", l.desk_half_depth);
    r.pair("desk_offset", l.desk_offset_from_user);
    r.pair("tracking_half_extent", l.tracking_half_extent);
    Vec2 home = l.home.position;
    r.pair("home", home);
    double yaw = l.home.yaw;
    r.degrees("home_yaw_deg", yaw);
    l.home = Pose2(home, yaw);
  }
  return validated(l, "layout");
}

nlohmann::ordered_json to_json(const WorkspaceLayout& l) {
  nlohmann::ordered_json j;
  j["desk_half_width"] = l.desk_half_width;
  j["desk_half_depth"] = l.desk_half_depth;
  j["desk_offset"] = {l.desk_offset_from_user.x, l.desk_offset_from_user.y};
  j["tracking_half_extent"] = {l.tracking_half_extent.x, l.tracking_half_extent.y};
  j["home"] = {l.home.position.x, l.home.position.y};
  j["home_yaw_deg"] = rad_to_deg(l.home.yaw);
  return j;
}

void RunConfig::validate() const {
  if (scene_file.has_value() == scene.has_value()) {
    throw Error(ErrorKind::invalid_input, "exactly one of scene_file and scene must be given");
  }
  experiment().validate();
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.strategy = strategy;
  e.layout = layout;
  e.agent = agent;
  e.gains = gains;
  e.constraints = constraints;
  e.n_trials = n_trials;
  e.seed = seed;
  return e;
}

SceneConfig RunConfig::effective_scene_config() const {
  SceneConfig c = scene.value();
  c.seed = substream_seed(seed, "scene");
  return c;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  {
    ObjectReader r(j, "");
    std::string strategy = "none";
    r.text("strategy", strategy);
    c.strategy = strategy_from_string(strategy);
    if (r.find("scene_file")) {
      std::string path;
      r.text("scene_file", path);
      c.scene_file = path;
    }
    if (const auto* s = r.find("scene")) {
      if (s->is_object() && s->contains("seed")) {
        parse_fail("field 'scene.seed': inline scenes take their seed from the run seed");
      }
      c.scene = scene_config_from_json(*s);
    }
    if (const auto* s = r.find("layout")) c.layout = layout_from_json(*s);
    if (const auto* s = r.find("agent")) c.agent = agent_config_from_json(*s);
    if (const auto* s = r.find("gains")) c.gains = gain_config_from_json(*s);
    if (const auto* s = r.find("constraints")) c.constraints = constraints_from_json(*s);
    r.integer("n_trials", c.n_trials);
    r.text("output_dir", c.output_dir);
    r.seed("seed", c.seed);
  }
  if (c.scene_file.has_value() && c.scene.has_value()) {
    parse_fail("config: give either 'scene_file' or 'scene', not both");
  }
  if (c.n_trials < 0) parse_fail("field 'n_trials': must be >= 0");
  return c;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["strategy"] = to_string(c.strategy);
  if (c.scene_file) j["scene_file"] = *c.scene_file;
  if (c.scene) {
    j["scene"] = to_json(*c.scene);
    j["scene"].erase("seed");
  }
  j["layout"] = to_json(c.layout);
  j["agent"] = to_json(c.agent);
  j["gains"] = to_json(c.gains);
  j["constraints"] = to_json(c.constraints);
  j["n_trials"] = c.n_trials;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(source + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  try {
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorKind::io_error, "cannot write '" + tmp.string() + "'");
      out << content;
      out.flush();
      if (!out) throw Error(ErrorKind::io_error, "short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
  } catch (const fs::filesystem_error& e) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorKind::io_error, e.what());
  } catch (const Error&) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

}  // namespace occlusim
