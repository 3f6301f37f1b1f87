#include "occlusim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "occlusim/error.hpp"

namespace occlusim {

const char* to_string(TrialPhase p) {
  switch (p) {
    case TrialPhase::travel: return "travel";
    case TrialPhase::survey: return "survey";
    case TrialPhase::pointing: return "pointing";
  }
  return "unknown";
}

void AgentConfig::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorKind::invalid_input, what); };
  if (!(dt > 0.0)) bad("dt must be > 0");
  if (!(walk_speed > 0.0) || !(turn_rate > 0.0)) bad("walk_speed and turn_rate must be > 0");
  if (!(orbit_clearance >= 0.0)) bad("orbit_clearance must be >= 0");
  if (!(survey_laps > 0.0 && survey_laps <= 100.0)) bad("survey_laps must be in (0, 100]");
  if (!(fov_half_angle > 0.0 && fov_half_angle < kPi) || !(fov_range > 0.0)) bad("invalid fov");
  if (!(pointing_noise_sd >= 0.0)) bad("pointing_noise_sd must be >= 0");
  if (!(approach_gap_min >= 0.0) || !(approach_gap_min <= interaction_distance)) {
    bad("approach_gap_min must lie in [0, interaction_distance]");
  }
  if (!(teleport_hop_min > 0.0) || !(teleport_hop_min <= teleport_hop_max)) {
    bad("teleport hop range must satisfy 0 < min <= max");
  }
  if (!(teleport_dwell >= 0.0)) bad("teleport_dwell must be >= 0");
}

void ExperimentConfig::validate() const {
  layout.validate();
  agent.validate();
  gains.validate();
  constraints.validate();
  if (n_trials < 0) throw Error(ErrorKind::invalid_input, "n_trials must be >= 0");
}

namespace {

// Trees near a moving point, rebuilt when the point drifts too far.
class LocalObstacles {
 public:
  LocalObstacles(const Scene& scene, double reach) : scene_(scene), reach_(reach) {}

  const std::vector<Circle>& around(Vec2 p) {
    if (!valid_ || (p - center_).norm() > kRecenter) {
      center_ = p;
      list_ = scene_.obstacles_near(p, reach_ + kRecenter);
      valid_ = true;
    }
    return list_;
  }

 private:
  static constexpr double kRecenter = 3.0;
  const Scene& scene_;
  double reach_;
  Vec2 center_;
  std::vector<Circle> list_;
  bool valid_ = false;
};

double bearing(Vec2 from, Vec2 to) {
  const Vec2 d = to - from;
  return std::atan2(d.y, d.x);
}

class TrialRunner {
 public:
  TrialRunner(const Scene& scene, int position, const ExperimentConfig& cfg, SimulationState& state)
      : scene_(scene),
        position_(position),
        cfg_(cfg),
        agent_(cfg.agent),
        state_(state),
        room_(cfg.layout.tracking_space()),
        desk_(cfg.layout.desk_physical()),
        near_user_(scene, reach()),
        near_preview_(scene, reach()) {
    trace_.trial = position;
    trace_.target_tree = scene.targets.at(static_cast<std::size_t>(position));
  }

  TrialTrace run() {
    travel();
    survey();
    pointing();
    return std::move(trace_);
  }

 private:
  // Any tree that can touch the desk or a resolver candidate lies within this
  // distance of the user.
  double reach() const {
    const Aabb room = cfg_.layout.tracking_space();
    const double diag = std::hypot(room.width(), room.height());
    return diag + cfg_.layout.desk_physical().circumradius() + cfg_.constraints.max_translation +
           scene_.max_tree_radius() + 0.5;
  }

  std::int64_t last_index() const { return state_.next_frame - 1; }
  double time_of(std::int64_t index) const { return static_cast<double>(index) * agent_.dt; }

  Pose2 move_toward(const Pose2& from, Vec2 goal, double max_step, double max_turn,
                    double idle_yaw) const {
    const Vec2 d = goal - from.position;
    const double dist = d.norm();
    Vec2 pos = dist <= max_step ? goal : from.position + d * (max_step / dist);
    pos = room_.clamp(pos);
    double yaw = from.yaw;
    if (agent_.force_gaze_at_desk) {
      if (pos != desk_.center) yaw = bearing(pos, desk_.center);
    } else {
      const double desired = dist > 0.0 ? std::atan2(d.y, d.x) : idle_yaw;
      const double diff = normalize_angle(desired - from.yaw);
      yaw = std::abs(diff) <= max_turn ? desired : from.yaw + std::copysign(max_turn, diff);
    }
    return {pos, yaw};
  }

  void frame(TrialPhase phase, const Pose2& next_physical) {
    const Pose2 previous = state_.physical;
    state_.physical = next_physical;
    const std::int64_t index = state_.next_frame++;
    const WorldMapping& m = state_.mapping;

    FrameRecord rec;
    rec.index = index;
    rec.time = time_of(index);
    rec.trial = position_;
    rec.phase = phase;
    rec.physical = state_.physical;
    rec.virtual_pose = m.to_virtual(state_.physical);
    rec.desk_virtual = m.to_virtual(desk_);
    const FovWedge fov(rec.virtual_pose.position, rec.virtual_pose.yaw, agent_.fov_half_angle,
                       agent_.fov_range);
    rec.desk_in_fov = rect_in_fov(fov, rec.desk_virtual);
    const auto& obstacles = near_user_.around(rec.virtual_pose.position);
    rec.occluded = is_occluded(rec.desk_virtual, obstacles);
    trace_.items.emplace_back(rec);

    if (phase != TrialPhase::survey || cfg_.strategy != Strategy::rdw) return;
    const UserKinematics kin{rec.virtual_pose, m.to_virtual(previous)};
    const RedirectStep r =
        step(state_.redirect, kin, rec.desk_virtual, obstacles, fov, cfg_.gains, cfg_.constraints);
    state_.redirect = r.state;
    if (r.adjustment.is_identity()) return;
    state_.mapping = m.adjusted(r.adjustment, rec.virtual_pose.position);
    RedirectEvent ev;
    ev.index = index;
    ev.time = rec.time;
    ev.trial = position_;
    ev.adjustment = r.adjustment;
    ev.pivot = rec.virtual_pose.position;
    ev.frame_turn = r.frame_turn;
    ev.frame_distance = r.frame_distance;
    ev.mapping = state_.mapping;
    trace_.items.emplace_back(ev);
    trace_.applied_rotation_total_deg += rad_to_deg(r.adjustment.rotation_about_user);
  }

  void phase_event(TrialPhase phase) {
    // Phase events precede the first frame of the phase.
    const std::int64_t index = state_.next_frame;
    trace_.items.emplace_back(PhaseEvent{index, time_of(index), position_, phase});
  }

  void stage(TeleportStageMachine& machine, TeleportStage to) {
    machine.advance(to);
    trace_.items.emplace_back(StageEvent{last_index(), time_of(last_index()), position_, to});
  }

  bool desk_occluded_now() {
    const Vec2 user = state_.mapping.to_virtual(state_.physical.position);
    return is_occluded(state_.mapping.to_virtual(desk_), near_user_.around(user));
  }

  void travel() {
    phase_event(TrialPhase::travel);
    const Circle& tree = scene_.target_tree(static_cast<std::size_t>(position_));
    Rng& rng = state_.agent_rng;

    const Vec2 start = state_.planned_position;
    const Vec2 heading = start == tree.center ? Vec2{1.0, 0.0} : unit(tree.center - start);
    const double gap = uniform(rng, agent_.approach_gap_min, agent_.interaction_distance);
    const Vec2 landing = tree.center - heading * (tree.radius + gap);

    std::vector<Vec2> waypoints;
    Vec2 cur = start;
    for (;;) {
      const double hop = uniform(rng, agent_.teleport_hop_min, agent_.teleport_hop_max);
      const double remaining = (landing - cur).norm();
      if (remaining <= hop) {
        waypoints.push_back(landing);
        break;
      }
      cur = cur + unit(landing - cur) * hop;
      waypoints.push_back(cur);
    }

    const std::int64_t travel_start = state_.next_frame;
    for (std::size_t h = 0; h < waypoints.size(); ++h) {
      teleport(static_cast<int>(h), waypoints[h], bearing(waypoints[h], tree.center),
               h + 1 == waypoints.size());
    }
    state_.planned_position = landing;
    trace_.travel_time = static_cast<double>(state_.next_frame - travel_start) * agent_.dt;
  }

  void teleport(int hop, Vec2 target, double facing, bool final_hop) {
    TeleportStageMachine machine;
    const int dwell = std::max(1, static_cast<int>(std::lround(agent_.teleport_dwell / agent_.dt)));
    const TeleportRequest request{target, facing};

    frame(TrialPhase::travel, state_.physical);
    stage(machine, TeleportStage::target_specification);
    stage(machine, TeleportStage::pre_travel_information);
    const auto& obstacles = near_preview_.around(target);
    PreviewState preview;
    try {
      preview = make_preview(request, cfg_.layout, state_.physical, obstacles, scene_.bounds,
                             cfg_.strategy == Strategy::atr, cfg_.constraints);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::invalid_target) throw;
      throw Error(ErrorKind::scenario_error, std::string("unreachable target: ") + e.detail());
    }
    for (int i = 1; i < dwell; ++i) frame(TrialPhase::travel, state_.physical);

    stage(machine, TeleportStage::transition);
    const CommitResult committed = commit_teleport(preview, cfg_.layout, state_.physical,
                                                   state_.redirect, cfg_.constraints);
    state_.mapping = committed.mapping;
    state_.redirect = committed.redirect_state;

    TeleportEvent ev;
    ev.index = last_index();
    ev.time = time_of(ev.index);
    ev.trial = position_;
    ev.hop = hop;
    ev.final_hop = final_hop;
    ev.request = request;
    ev.occluded_at_preview = preview.occluded_naive;
    ev.atr_applied = cfg_.strategy == Strategy::atr;
    ev.resolved = preview.resolved;
    ev.rotation = preview.adjustment_rotation;
    ev.translation = preview.adjustment_translation;
    ev.occluded_after_commit = is_occluded(state_.mapping.to_virtual(desk_), obstacles);
    ev.mapping = state_.mapping;
    trace_.items.emplace_back(ev);
    stage(machine, TeleportStage::post_travel_feedback);
    stage(machine, TeleportStage::idle);

    trace_.teleport_adjustment_total_deg += rad_to_deg(preview.adjustment_rotation);
    trace_.outcome.teleports.push_back({ev.occluded_at_preview, ev.occluded_after_commit});
    if (final_hop) trace_.outcome.occluded_at_travel_end = preview.occluded_naive;
  }

  void survey() {
    phase_event(TrialPhase::survey);
    const Circle& tree = scene_.target_tree(static_cast<std::size_t>(position_));
    const double radius = tree.radius + agent_.orbit_clearance;
    const double direction = position_ % 2 == 0 ? 1.0 : -1.0;
    const Vec2 user = state_.mapping.to_virtual(state_.physical.position);
    const double start_angle = user == tree.center ? 0.0 : bearing(tree.center, user);
    const double angular_speed = agent_.walk_speed / radius;
    const auto frames =
        static_cast<std::int64_t>(std::ceil(agent_.survey_laps * kTwoPi / (angular_speed * agent_.dt)));
    const double max_step = 2.0 * agent_.walk_speed * agent_.dt;
    const double max_turn = agent_.turn_rate * agent_.dt;

    for (std::int64_t s = 1; s <= frames; ++s) {
      const double angle =
          start_angle + direction * angular_speed * static_cast<double>(s) * agent_.dt;
      const Vec2 goal_virtual = tree.center + unit_from_angle(angle) * radius;
      const Vec2 goal = room_.clamp(state_.mapping.to_physical(goal_virtual));
      frame(TrialPhase::survey, move_toward(state_.physical, goal, max_step, max_turn,
                                            state_.physical.yaw));
    }
    trace_.survey_time = static_cast<double>(frames) * agent_.dt;
    trace_.outcome.occluded_at_survey_end = desk_occluded_now();
  }

  void pointing() {
    phase_event(TrialPhase::pointing);
    const Pose2& home = cfg_.layout.home;
    const double max_step = agent_.walk_speed * agent_.dt;
    const double max_turn = agent_.turn_rate * agent_.dt;
    constexpr int kMaxFrames = 1 << 20;
    int n = 0;
    do {
      frame(TrialPhase::pointing,
            move_toward(state_.physical, home.position, max_step, max_turn, home.yaw));
      if (++n > kMaxFrames) throw Error(ErrorKind::internal_error, "agent cannot return home");
    } while (state_.physical.position != home.position ||
             (!agent_.force_gaze_at_desk && state_.physical.yaw != home.yaw));

    if (state_.previous_tree) {
      const Vec2 user = state_.mapping.to_virtual(state_.physical.position);
      const Vec2 prev = scene_.trees.at(*state_.previous_tree).center;
      PointingSample s;
      s.truth = normalize_angle(bearing(user, prev));
      double noise = 0.0;
      if (agent_.pointing_noise_sd > 0.0) {
        noise = std::normal_distribution<double>(0.0, agent_.pointing_noise_sd)(state_.noise_rng);
      }
      s.pointed = noise == 0.0 ? s.truth : normalize_angle(s.truth + deg_to_rad(noise));
      trace_.pointing = s;
      trace_.items.emplace_back(
          PointingEvent{last_index(), time_of(last_index()), position_, *state_.previous_tree, s});
    }
    state_.previous_tree = trace_.target_tree;
  }

  const Scene& scene_;
  int position_;
  const ExperimentConfig& cfg_;
  const AgentConfig& agent_;
  SimulationState& state_;
  Aabb room_;
  OrientedRect desk_;
  LocalObstacles near_user_;
  LocalObstacles near_preview_;
  TrialTrace trace_;
};

}  // namespace

SimulationState initial_state(const Scene& scene, const ExperimentConfig& cfg) {
  cfg.validate();
  SimulationState s;
  s.physical = cfg.layout.home;
  s.redirect = initial_redirect_state(cfg.constraints);
  s.agent_rng = make_rng(cfg.seed, "agent");
  s.noise_rng = make_rng(cfg.seed, "noise");
  Vec2 start = scene.bounds.center();
  double facing = 0.0;
  if (!scene.targets.empty()) {
    const Vec2 first = scene.target_tree(0).center;
    const Vec2 toward_middle =
        scene.bounds.center() == first ? Vec2{-1.0, 0.0} : unit(scene.bounds.center() - first);
    const double offset = 0.5 * (cfg.agent.teleport_hop_min + cfg.agent.teleport_hop_max);
    start = scene.bounds.clamp(first + toward_middle * offset);
    if (start != first) facing = bearing(start, first);
  }
  s.planned_position = start;
  s.mapping = WorldMapping::placing(cfg.layout.home, Pose2(start, facing));
  return s;
}

TrialTrace run_trial(const Scene& scene, int position, const ExperimentConfig& cfg,
                     SimulationState& state) {
  if (position < 0 || static_cast<std::size_t>(position) >= scene.targets.size()) {
    throw Error(ErrorKind::scenario_error, "trial " + std::to_string(position) + " has no target tree");
  }
  return TrialRunner(scene, position, cfg, state).run();
}

ExperimentResult run_experiment(const Scene& scene, const ExperimentConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(cfg.n_trials) > scene.targets.size()) {
    throw Error(ErrorKind::scenario_error, "n_trials exceeds the number of target trees");
  }
  SimulationState state = initial_state(scene, cfg);
  ExperimentResult r;
  r.initial_mapping = state.mapping;
  for (int k = 0; k < cfg.n_trials; ++k) {
    try {
      r.trials.push_back(run_trial(scene, k, cfg, state));
    } catch (const Error& e) {
      throw Error(e.kind(), "trial " + std::to_string(k) + ": " + e.detail());
    }
  }
  r.final_mapping = state.mapping;
  return r;
}

TrialRow summarize_trial(const TrialTrace& t) {
  TrialRow row;
  row.trial = t.trial;
  row.target_tree = t.target_tree;
  row.travel_time = t.travel_time;
  row.survey_time = t.survey_time;
  row.occluded_at_travel_end = t.outcome.occluded_at_travel_end;
  row.occluded_at_survey_end = t.outcome.occluded_at_survey_end;
  row.teleport_adjustment_total_deg = t.teleport_adjustment_total_deg;
  row.redirect_rotation_total_deg = t.applied_rotation_total_deg;
  if (t.pointing) {
    const PointingSample s[] = {*t.pointing};
    row.pointing_signed_error_deg = signed_errors(s).front();
  }
  return row;
}

ExperimentSummary summarize(const ExperimentResult& r) {
  ExperimentSummary s;
  for (const TrialTrace& t : r.trials) {
    s.rows.push_back(summarize_trial(t));
    s.outcomes.push_back(t.outcome);
    if (t.pointing) s.pointing.push_back(*t.pointing);
  }
  return s;
}

namespace {

ExperimentSummary run_unlabelled(const BatchJob& job) {
  if (job.scene) return summarize(run_experiment(*job.scene, job.config));
  if (!job.scene_config) throw Error(ErrorKind::invalid_input, "batch job without a scene");
  return summarize(run_experiment(generate_scene(*job.scene_config), job.config));
}

ExperimentSummary run_job(const BatchJob& job) {
  if (job.label.empty()) return run_unlabelled(job);
  try {
    return run_unlabelled(job);
  } catch (const Error& e) {
    throw Error(e.kind(), job.label + ": " + e.detail());
  }
}

}  // namespace

std::vector<ExperimentSummary> run_batch_serial(const std::vector<BatchJob>& jobs) {
  std::vector<ExperimentSummary> out;
  out.reserve(jobs.size());
  for (const BatchJob& job : jobs) out.push_back(run_job(job));
  return out;
}

std::vector<ExperimentSummary> run_batch_parallel(const std::vector<BatchJob>& jobs) {
  const long n = static_cast<long>(jobs.size());
  std::vector<ExperimentSummary> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = run_job(jobs[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace occlusim
