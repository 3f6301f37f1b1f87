#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "occlusim/config_io.hpp"
#include "occlusim/error.hpp"

namespace occlusim::cli {

// Exit statuses shared by every command.
enum Exit : int {
  ok = 0,
  unresolved = 1,   // resolve: no occlusion-free pose within the limits
  usage = 2,        // parse failure, bad flags, invalid config, mixed inputs
  generation = 3,   // scene generation failed
  scenario = 4,     // the experiment could not be carried out
  io = 5,           // reading inputs or writing outputs failed
};

int exit_status(ErrorKind kind);

/// Flags that override values from a run config file.
struct RunOverrides {
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_trials;
  std::optional<std::string> output_dir;
  std::optional<std::string> scene_file;
};

/// Loads a run config and applies the overrides. Throws parse_error.
RunConfig load_run_config(const std::string& path, const RunOverrides& overrides);

int cmd_generate(const std::string& config_path, const std::string& out_path, std::ostream& out,
                 std::ostream& err);

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err);

struct SweepArgs {
  std::string config_path;
  std::string grid_path;
  std::optional<std::string> out_path;  // default <output_dir>/sweep.csv
  int seeds = 1;                        // run seeds seed, seed+1, ...
  bool serial = false;
  RunOverrides overrides;
};

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct ResolveArgs {
  std::string scene_path;
  double desk_x = 0.0;
  double desk_y = 0.0;
  double desk_yaw_deg = 0.0;
  double desk_half_width = 0.8;
  double desk_half_depth = 0.4;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double max_rotation_deg = 90.0;
  double max_translation = 1.0;
  double rotation_step_deg = 1.0;
  double translation_step = 0.05;
  std::string lock = "none";
};

int cmd_resolve(const ResolveArgs& args, std::ostream& out, std::ostream& err);

struct AnalyzeArgs {
  std::vector<std::string> traces;
  std::optional<std::string> elbow_column;
  int k_max = 6;
  std::optional<double> drop_guesses_deg;
  std::optional<std::string> csv_path;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);

}  // namespace occlusim::cli
