#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "occlusim/geometry.hpp"
#include "occlusim/mapping.hpp"
#include "occlusim/metrics.hpp"
#include "occlusim/redirect.hpp"
#include "occlusim/resolver.hpp"
#include "occlusim/rng.hpp"
#include "occlusim/scenario.hpp"
#include "occlusim/teleport.hpp"

namespace occlusim {

struct AgentConfig {
  double dt = 1.0 / 90.0;
  double walk_speed = 1.0;
  double turn_rate = kPi / 2.0;
  double orbit_clearance = 0.5;
  double survey_laps = 1.0;  // orbits of the target tree per survey
  double fov_half_angle = deg_to_rad(57.5);
  double fov_range = 20.0;
  double pointing_noise_sd = 0.0;  // degrees
  double interaction_distance = 2.0;
  double approach_gap_min = 0.5;  // final landing gap to the tree edge is U(min, interaction_distance)
  double teleport_hop_min = 4.0;
  double teleport_hop_max = 8.0;
  double teleport_dwell = 1.0;  // seconds spent specifying each teleport
  bool force_gaze_at_desk = false;

  void validate() const;
};

enum class TrialPhase { travel, survey, pointing };

const char* to_string(TrialPhase p);

struct FrameRecord {
  std::int64_t index = 0;
  double time = 0.0;
  int trial = 0;
  TrialPhase phase = TrialPhase::travel;
  Pose2 physical;
  Pose2 virtual_pose;
  OrientedRect desk_virtual;
  bool desk_in_fov = false;
  bool occluded = false;
};

struct PhaseEvent {
  std::int64_t index = 0;
  double time = 0.0;
  int trial = 0;
  TrialPhase phase = TrialPhase::travel;
};

struct StageEvent {
  std::int64_t index = 0;
  double time = 0.0;
  int trial = 0;
  TeleportStage stage = TeleportStage::idle;
};

struct TeleportEvent {
  std::int64_t index = 0;
  double time = 0.0;
  int trial = 0;
  int hop = 0;
  bool final_hop = false;
  TeleportRequest request;
  bool occluded_at_preview = false;
  bool atr_applied = false;
  bool resolved = false;
  double rotation = 0.0;
  double translation = 0.0;
  bool occluded_after_commit = false;
  WorldMapping mapping;  // after commit
};

struct RedirectEvent {
  std::int64_t index = 0;
  double time = 0.0;
  int trial = 0;
  WorldAdjustment adjustment;
  Vec2 pivot;
  double frame_turn = 0.0;
  double frame_distance = 0.0;
  WorldMapping mapping;  // after the adjustment
};

struct PointingEvent {
  std::int64_t index = 0;
  double time = 0.0;
  int trial = 0;
  std::size_t tree = 0;
  PointingSample sample;
};

using TraceItem =
    std::variant<FrameRecord, PhaseEvent, StageEvent, TeleportEvent, RedirectEvent, PointingEvent>;

struct TrialTrace {
  int trial = 0;
  std::size_t target_tree = 0;
  std::vector<TraceItem> items;  // in emission order; events follow their frame
  double travel_time = 0.0;
  double survey_time = 0.0;
  std::optional<PointingSample> pointing;  // absent on the first trial
  double applied_rotation_total_deg = 0.0;  // signed redirect rotation
  double teleport_adjustment_total_deg = 0.0;  // signed preview rotation
  TrialOutcome outcome;
};

struct ExperimentConfig {
  Strategy strategy = Strategy::none;
  WorkspaceLayout layout;
  AgentConfig agent;
  GainConfig gains;
  ResolutionConstraints constraints;
  int n_trials = 15;
  std::uint64_t seed = 1;

  void validate() const;
};

/// State threaded from one trial to the next.
struct SimulationState {
  WorldMapping mapping;
  RedirectState redirect;
  Pose2 physical;
  Vec2 planned_position;  // where the agent meant to stand after its last teleport
  std::int64_t next_frame = 0;
  std::optional<std::size_t> previous_tree;
  Rng agent_rng;
  Rng noise_rng;
};

/// User at home in the room, registered a few meters from the first target.
SimulationState initial_state(const Scene& scene, const ExperimentConfig& cfg);

/// Travel, survey and pointing toward scene target `position`.
/// Throws scenario_error when the target cannot be reached.
TrialTrace run_trial(const Scene& scene, int position, const ExperimentConfig& cfg,
                     SimulationState& state);

struct ExperimentResult {
  WorldMapping initial_mapping;
  std::vector<TrialTrace> trials;
  WorldMapping final_mapping;
};

ExperimentResult run_experiment(const Scene& scene, const ExperimentConfig& cfg);

/// One row of the run summary.
struct TrialRow {
  int trial = 0;
  std::size_t target_tree = 0;
  double travel_time = 0.0;
  double survey_time = 0.0;
  bool occluded_at_travel_end = false;
  bool occluded_at_survey_end = false;
  double teleport_adjustment_total_deg = 0.0;
  double redirect_rotation_total_deg = 0.0;
  std::optional<double> pointing_signed_error_deg;
};

TrialRow summarize_trial(const TrialTrace& t);

struct ExperimentSummary {
  std::vector<TrialRow> rows;
  std::vector<TrialOutcome> outcomes;
  std::vector<PointingSample> pointing;
};

ExperimentSummary summarize(const ExperimentResult& r);

/// One experiment of a batch; the scene is shared or generated by the worker.
struct BatchJob {
  std::shared_ptr<const Scene> scene;
  std::optional<SceneConfig> scene_config;
  ExperimentConfig config;
  std::string label;  // prefixed to errors raised by this job
};

std::vector<ExperimentSummary> run_batch_serial(const std::vector<BatchJob>& jobs);
/// OpenMP over jobs; results are in job order and equal to run_batch_serial.
/// The first failing job (by index) is rethrown.
std::vector<ExperimentSummary> run_batch_parallel(const std::vector<BatchJob>& jobs);

}  // namespace occlusim
