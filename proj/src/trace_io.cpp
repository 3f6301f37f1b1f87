#include "occlusim/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "occlusim/error.hpp"
#include "occlusim/teleport.hpp"

namespace occlusim {

namespace {

using ojson = nlohmann::ordered_json;

ojson pose_json(const Pose2& p) { return {p.position.x, p.position.y, p.yaw}; }
ojson vec_json(Vec2 v) { return {v.x, v.y}; }
ojson mapping_json(const WorldMapping& m) { return {m.rotation, m.translation.x, m.translation.y}; }

template <class T>
ojson stamp(const char* type, const T& ev) {
  ojson j;
  j["type"] = type;
  j["i"] = ev.index;
  j["t"] = ev.time;
  j["trial"] = ev.trial;
  return j;
}

struct ItemWriter {
  std::ostream& out;

  void operator()(const FrameRecord& f) const {
    ojson j = stamp("frame", f);
    j["phase"] = to_string(f.phase);
    j["phys"] = pose_json(f.physical);
    j["virt"] = pose_json(f.virtual_pose);
    j["desk"] = {f.desk_virtual.center.x, f.desk_virtual.center.y, f.desk_virtual.yaw};
    j["in_fov"] = f.desk_in_fov;
    j["occluded"] = f.occluded;
    out << j.dump() << '\n';
  }
  void operator()(const PhaseEvent& e) const {
    ojson j = stamp("phase", e);
    j["phase"] = to_string(e.phase);
    out << j.dump() << '\n';
  }
  void operator()(const StageEvent& e) const {
    ojson j = stamp("stage", e);
    j["stage"] = to_string(e.stage);
    out << j.dump() << '\n';
  }
  void operator()(const TeleportEvent& e) const {
    ojson j = stamp("teleport", e);
    j["hop"] = e.hop;
    j["final_hop"] = e.final_hop;
    j["target"] = vec_json(e.request.target);
    j["facing"] = e.request.facing;
    j["occluded_at_preview"] = e.occluded_at_preview;
    j["atr_applied"] = e.atr_applied;
    j["resolved"] = e.resolved;
    j["rotation"] = e.rotation;
    j["translation"] = e.translation;
    j["occluded_after_commit"] = e.occluded_after_commit;
    j["mapping"] = mapping_json(e.mapping);
    out << j.dump() << '\n';
  }
  void operator()(const RedirectEvent& e) const {
    ojson j = stamp("redirect", e);
    j["rotation"] = e.adjustment.rotation_about_user;
    j["translation"] = vec_json(e.adjustment.translation);
    j["pivot"] = vec_json(e.pivot);
    j["frame_turn"] = e.frame_turn;
    j["frame_distance"] = e.frame_distance;
    j["mapping"] = mapping_json(e.mapping);
    out << j.dump() << '\n';
  }
  void operator()(const PointingEvent& e) const {
    ojson j = stamp("pointing", e);
    j["tree"] = e.tree;
    j["pointed"] = e.sample.pointed;
    j["truth"] = e.sample.truth;
    out << j.dump() << '\n';
  }
};

ojson layout_exact(const WorkspaceLayout& l) {
  ojson j;
  j["desk_half_width"] = l.desk_half_width;
  j["desk_half_depth"] = l.desk_half_depth;
  j["desk_offset"] = vec_json(l.desk_offset_from_user);
  j["tracking_half_extent"] = vec_json(l.tracking_half_extent);
  j["home"] = pose_json(l.home);
  return j;
}

ojson row_json(const TrialRow& r, const char* type = nullptr) {
  ojson j;
  if (type) j["type"] = type;
  j["trial"] = r.trial;
  j["target"] = r.target_tree;
  j["travel_time"] = r.travel_time;
  j["survey_time"] = r.survey_time;
  j["occluded_at_travel_end"] = r.occluded_at_travel_end;
  j["occluded_at_survey_end"] = r.occluded_at_survey_end;
  j["teleport_adjustment_total_deg"] = r.teleport_adjustment_total_deg;
  j["redirect_rotation_total_deg"] = r.redirect_rotation_total_deg;
  if (r.pointing_signed_error_deg) {
    j["pointing_signed_error_deg"] = *r.pointing_signed_error_deg;
  } else {
    j["pointing_signed_error_deg"] = nullptr;
  }
  return j;
}

// ---- reading ----

class LineError {
 public:
  explicit LineError(std::size_t line) : line_(line) {}
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::parse_error, "trace line " + std::to_string(line_) + ": " + what);
  }

 private:
  std::size_t line_;
};

const nlohmann::json& field(const nlohmann::json& j, const char* key, const LineError& where) {
  const auto it = j.find(key);
  if (it == j.end()) where.fail(std::string("missing field '") + key + "'");
  return *it;
}

double number(const nlohmann::json& j, const char* key, const LineError& where) {
  const auto& v = field(j, key, where);
  if (!v.is_number()) where.fail(std::string("field '") + key + "': expected a number");
  return v.get<double>();
}

bool boolean(const nlohmann::json& j, const char* key, const LineError& where) {
  const auto& v = field(j, key, where);
  if (!v.is_boolean()) where.fail(std::string("field '") + key + "': expected true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const nlohmann::json& j, const char* key, std::size_t n,
                            const LineError& where) {
  const auto& v = field(j, key, where);
  if (!v.is_array() || v.size() != n) {
    where.fail(std::string("field '") + key + "': expected " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) where.fail(std::string("field '") + key + "': expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vec2 vec(const nlohmann::json& j, const char* key, const LineError& where) {
  const auto v = numbers(j, key, 2, where);
  return {v[0], v[1]};
}

Pose2 pose(const nlohmann::json& j, const char* key, const LineError& where) {
  const auto v = numbers(j, key, 3, where);
  return {Vec2{v[0], v[1]}, v[2]};
}

WorldMapping mapping(const nlohmann::json& j, const char* key, const LineError& where) {
  const auto v = numbers(j, key, 3, where);
  WorldMapping m;
  m.rotation = v[0];
  m.translation = Vec2{v[1], v[2]};
  return m;
}

std::string text(const nlohmann::json& j, const char* key, const LineError& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) where.fail(std::string("field '") + key + "': expected a string");
  return v.get<std::string>();
}

TraceHeader read_header(const nlohmann::json& j, const LineError& where) {
  if (text(j, "type", where) != "header") where.fail("first line is not a trace header");
  if (text(j, "format", where) != kTraceFormat) where.fail("not an occlusim trace");
  if (field(j, "format_version", where) != kTraceFormatVersion) {
    where.fail("unsupported trace format version");
  }
  TraceHeader h;
  h.version = text(j, "version", where);
  try {
    h.strategy = strategy_from_string(text(j, "strategy", where));
  } catch (const Error& e) {
    where.fail(e.detail());
  }
  const auto& seed = field(j, "seed", where);
  if (!seed.is_number_unsigned()) where.fail("field 'seed': expected an unsigned integer");
  h.seed = seed.get<std::uint64_t>();
  h.n_trials = static_cast<int>(number(j, "n_trials", where));
  h.dt = number(j, "dt", where);
  h.config = field(j, "config", where);
  const auto& l = field(j, "layout", where);
  h.layout.desk_half_width = number(l, "desk_half_width", where);
  h.layout.desk_half_depth = number(l, "desk_half_depth", where);
  h.layout.desk_offset_from_user = vec(l, "desk_offset", where);
  h.layout.tracking_half_extent = vec(l, "tracking_half_extent", where);
  h.layout.home = pose(l, "home", where);
  h.initial_mapping = mapping(j, "initial_mapping", where);
  return h;
}

// Calls on_header once, then visit(json, LineError) for every later line.
template <class OnHeader, class Visit>
TraceHeader for_each_line(std::istream& in, OnHeader&& on_header, Visit&& visit) {
  std::string line;
  std::size_t n = 0;
  std::optional<TraceHeader> header;
  bool footer = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const LineError where(n);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      where.fail(e.what());
    }
    if (!j.is_object()) where.fail("expected a JSON object");
    if (!header) {
      header = read_header(j, where);
      on_header(*header);
      continue;
    }
    if (footer) where.fail("content after the footer");
    footer = text(j, "type", where) == "footer";
    visit(j, where);
  }
  if (!header) throw Error(ErrorKind::parse_error, "empty trace");
  if (!footer) throw Error(ErrorKind::parse_error, "trace has no footer (truncated?)");
  return *header;
}

}  // namespace

void write_trace(std::ostream& out, const TraceHeader& header, const ExperimentResult& result) {
  ojson h;
  h["type"] = "header";
  h["format"] = kTraceFormat;
  h["format_version"] = kTraceFormatVersion;
  h["version"] = header.version;
  h["strategy"] = to_string(header.strategy);
  h["seed"] = header.seed;
  h["n_trials"] = header.n_trials;
  h["dt"] = header.dt;
  h["config"] = header.config;
  h["layout"] = layout_exact(header.layout);
  h["initial_mapping"] = mapping_json(result.initial_mapping);
  out << h.dump() << '\n';

  const ItemWriter writer{out};
  for (const TrialTrace& t : result.trials) {
    for (const TraceItem& item : t.items) std::visit(writer, item);
    out << row_json(summarize_trial(t), "trial").dump() << '\n';
  }

  ojson f;
  f["type"] = "footer";
  f["trials"] = result.trials.size();
  f["final_mapping"] = mapping_json(result.final_mapping);
  out << f.dump() << '\n';
}

std::string render_trace(const TraceHeader& header, const ExperimentResult& result) {
  std::ostringstream ss;
  write_trace(ss, header, result);
  return ss.str();
}

ParsedTrace parse_trace(std::istream& in) {
  ParsedTrace p;
  TrialOutcome current;
  p.header = for_each_line(in, [](const TraceHeader&) {}, [&](const nlohmann::json& j, const LineError& where) {
    const std::string type = text(j, "type", where);
    if (type == "frame") {
      ++p.frames;
    } else if (type == "teleport") {
      current.teleports.push_back(
          {boolean(j, "occluded_at_preview", where), boolean(j, "occluded_after_commit", where)});
    } else if (type == "pointing") {
      p.pointing.push_back({number(j, "pointed", where), number(j, "truth", where)});
    } else if (type == "trial") {
      TrialRow r;
      r.trial = static_cast<int>(number(j, "trial", where));
      r.target_tree = static_cast<std::size_t>(number(j, "target", where));
      r.travel_time = number(j, "travel_time", where);
      r.survey_time = number(j, "survey_time", where);
      r.occluded_at_travel_end = boolean(j, "occluded_at_travel_end", where);
      r.occluded_at_survey_end = boolean(j, "occluded_at_survey_end", where);
      r.teleport_adjustment_total_deg = number(j, "teleport_adjustment_total_deg", where);
      r.redirect_rotation_total_deg = number(j, "redirect_rotation_total_deg", where);
      const auto& e = field(j, "pointing_signed_error_deg", where);
      if (!e.is_null()) r.pointing_signed_error_deg = number(j, "pointing_signed_error_deg", where);
      current.occluded_at_travel_end = r.occluded_at_travel_end;
      current.occluded_at_survey_end = r.occluded_at_survey_end;
      p.rows.push_back(r);
      p.outcomes.push_back(std::move(current));
      current = {};
    } else if (type == "footer") {
      p.final_mapping = mapping(j, "final_mapping", where);
    } else if (type != "phase" && type != "stage" && type != "redirect") {
      where.fail("unknown line type '" + type + "'");
    }
  });
  return p;
}

ReplayReport replay_trace(std::istream& in) {
  ReplayReport rep;
  std::optional<WorldMapping> m;
  std::optional<OrientedRect> desk;
  std::optional<WorkspaceLayout> layout;
  Pose2 physical;

  const auto mismatch = [&](const std::string& what, double t) {
    if (rep.consistent) {
      rep.consistent = false;
      rep.first_mismatch = what + " at t=" + format_number(t);
    }
  };

  const auto on_header = [&](const TraceHeader& h) {
    m = h.initial_mapping;
    layout = h.layout;
    desk = h.layout.desk_physical();
    physical = h.layout.home;
  };
  for_each_line(in, on_header, [&](const nlohmann::json& j, const LineError& where) {
    const std::string type = text(j, "type", where);
    const double t = j.contains("t") ? number(j, "t", where) : 0.0;
    if (type == "frame") {
      ++rep.frames;
      physical = pose(j, "phys", where);
      const Pose2 v = m->to_virtual(physical);
      const OrientedRect d = m->to_virtual(*desk);
      const auto dv = numbers(j, "desk", 3, where);
      if (!(v == pose(j, "virt", where))) mismatch("virtual pose", t);
      if (!(d.center == Vec2{dv[0], dv[1]} && d.yaw == dv[2])) mismatch("virtual desk", t);
    } else if (type == "redirect") {
      ++rep.adjustments;
      WorldAdjustment adj;
      adj.rotation_about_user = number(j, "rotation", where);
      adj.translation = vec(j, "translation", where);
      const Vec2 pivot = m->to_virtual(physical.position);
      if (!(pivot == vec(j, "pivot", where))) mismatch("redirect pivot", t);
      m = m->adjusted(adj, pivot);
      if (!(*m == mapping(j, "mapping", where))) mismatch("mapping after redirect", t);
    } else if (type == "teleport") {
      ++rep.adjustments;
      const TeleportRequest request{vec(j, "target", where), number(j, "facing", where)};
      const PreviewState preview = adjust_preview(request, *layout, physical,
                                                  number(j, "rotation", where),
                                                  number(j, "translation", where));
      m = commit_teleport(preview, *layout, physical, RedirectState{}, ResolutionConstraints{})
              .mapping;
      if (!(*m == mapping(j, "mapping", where))) mismatch("mapping after teleport", t);
    } else if (type == "footer") {
      if (!(*m == mapping(j, "final_mapping", where))) mismatch("final mapping", t);
    }
  });
  rep.final_mapping = *m;
  return rep;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string summary_csv(const std::vector<TrialRow>& rows) {
  std::string out =
      "trial,target_tree,travel_time,survey_time,occluded_at_travel_end,occluded_at_survey_end,"
      "teleport_adjustment_total_deg,redirect_rotation_total_deg,pointing_signed_error_deg\n";
  for (const TrialRow& r : rows) {
    out += std::to_string(r.trial) + ',' + std::to_string(r.target_tree) + ',' +
           format_number(r.travel_time) + ',' + format_number(r.survey_time) + ',' +
           (r.occluded_at_travel_end ? "1" : "0") + ',' + (r.occluded_at_survey_end ? "1" : "0") +
           ',' + format_number(r.teleport_adjustment_total_deg) + ',' +
           format_number(r.redirect_rotation_total_deg) + ',' +
           (r.pointing_signed_error_deg ? format_number(*r.pointing_signed_error_deg) : "") + '\n';
  }
  return out;
}

nlohmann::ordered_json efficacy_json(std::span<const TrialOutcome> outcomes, Strategy strategy) {
  try {
    const EfficacyReport e = efficacy(outcomes, strategy);
    return {{"occlusion_incidence", e.occlusion_incidence},
            {"resolved_fraction", e.resolved_fraction},
            {"n_trials", e.n_trials}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::no_occlusion_observed && e.kind() != ErrorKind::empty_data) throw;
    return nullptr;
  }
}

nlohmann::ordered_json orientation_json(std::span<const PointingSample> samples) {
  try {
    const OrientationReport o = orientation_report(samples);
    return {{"signed_error_deg", o.signed_error},
            {"absolute_error_deg", o.absolute_error},
            {"configuration_error_deg", o.configuration_error},
            {"ego_orientation_error_deg", o.ego_orientation_error},
            {"n", o.n}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::empty_data && e.kind() != ErrorKind::undefined_mean) throw;
    return nullptr;
  }
}

nlohmann::ordered_json summary_json(Strategy strategy, const ExperimentSummary& summary) {
  ojson j;
  j["strategy"] = to_string(strategy);
  j["n_trials"] = summary.rows.size();
  j["rows"] = ojson::array();
  for (const TrialRow& r : summary.rows) j["rows"].push_back(row_json(r));
  j["efficacy"] = efficacy_json(summary.outcomes, strategy);
  j["orientation"] = orientation_json(summary.pointing);
  return j;
}

}  // namespace occlusim
