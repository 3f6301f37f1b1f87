// occlusim: headless desk-occlusion simulator.
//
//   occlusim generate <scene-config.json> <scene.json>
//   occlusim run <run-config.json> [--strategy S] [--seed N] [--n-trials N] [--output-dir D]
//   occlusim sweep <run-config.json> <grid.json> [--seeds N] [--out F] [--serial]
//   occlusim resolve --scene F --desk X,Y,YAW_DEG --origin X,Y [constraint flags]
//   occlusim analyze <trace.jsonl>... [--elbow COLUMN --k-max K] [--csv F]
//
// Exit status: 0 ok, 1 unresolved (resolve), 2 usage or parse error,
// 3 scene generation failure, 4 scenario error, 5 I/O error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "occlusim/commands.hpp"

namespace cli = occlusim::cli;

namespace {

void add_run_overrides(CLI::App* cmd, cli::RunOverrides& o) {
  cmd->add_option("--strategy", o.strategy, "none, rdw or atr")
      ->check(CLI::IsMember({"none", "rdw", "atr"}));
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--n-trials", o.n_trials, "number of trials");
  cmd->add_option("--output-dir", o.output_dir, "directory for trace and summaries");
  cmd->add_option("--scene-file", o.scene_file, "scene JSON (replaces the config's scene)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk occlusion simulator for seated VR in a virtual forest"};
  app.require_subcommand(1);

  std::string gen_config, gen_out;
  auto* generate = app.add_subcommand("generate", "generate a forest scene");
  generate->add_option("config", gen_config, "scene config JSON")->required();
  generate->add_option("out", gen_out, "scene file to write")->required();

  std::string run_config;
  cli::RunOverrides run_overrides;
  auto* run = app.add_subcommand("run", "run an experiment and write trace and summaries");
  run->add_option("config", run_config, "run config JSON")->required();
  add_run_overrides(run, run_overrides);

  cli::SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "run a gain/density grid and write one row per cell");
  sweep->add_option("config", sweep_args.config_path, "base run config JSON")->required();
  sweep->add_option("grid", sweep_args.grid_path, "grid JSON")->required();
  sweep->add_option("--seeds", sweep_args.seeds, "seeds per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_args.out_path, "CSV to write");
  sweep->add_flag("--serial", sweep_args.serial, "run cells without OpenMP");
  add_run_overrides(sweep, sweep_args.overrides);

  cli::ResolveArgs resolve_args;
  std::vector<double> desk, origin, desk_size;
  auto* resolve = app.add_subcommand("resolve", "find the nearest occlusion-free desk pose");
  resolve->add_option("--scene", resolve_args.scene_path, "scene file")->required();
  resolve->add_option("--desk", desk, "desk center and yaw: X,Y,YAW_DEG")
      ->delimiter(',')
      ->expected(3)
      ->required();
  resolve->add_option("--desk-size", desk_size, "desk half width and half depth: HW,HD")
      ->delimiter(',')
      ->expected(2);
  resolve->add_option("--origin", origin, "rotation origin (user position): X,Y")
      ->delimiter(',')
      ->expected(2)
      ->required();
  resolve->add_option("--max-rotation-deg", resolve_args.max_rotation_deg);
  resolve->add_option("--max-translation", resolve_args.max_translation);
  resolve->add_option("--rotation-step-deg", resolve_args.rotation_step_deg);
  resolve->add_option("--translation-step", resolve_args.translation_step);
  resolve->add_option("--lock", resolve_args.lock, "none, cw or ccw");

  cli::AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "orientation and efficacy reports over traces");
  analyze->add_option("traces", analyze_args.traces, "trace files of one strategy");
  analyze->add_option("--elbow", analyze_args.elbow_column, "summary column for the k-means elbow");
  analyze->add_option("--k-max", analyze_args.k_max, "largest k on the elbow curve");
  analyze->add_option("--drop-guesses", analyze_args.drop_guesses_deg,
                      "drop pointing samples with |signed error| above this many degrees");
  analyze->add_option("--csv", analyze_args.csv_path, "write the combined per-trial table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::usage;
  }

  if (generate->parsed()) return cli::cmd_generate(gen_config, gen_out, std::cout, std::cerr);
  if (run->parsed()) return cli::cmd_run(run_config, run_overrides, std::cout, std::cerr);
  if (sweep->parsed()) return cli::cmd_sweep(sweep_args, std::cout, std::cerr);
  if (resolve->parsed()) {
    resolve_args.desk_x = desk[0];
    resolve_args.desk_y = desk[1];
    resolve_args.desk_yaw_deg = desk[2];
    resolve_args.origin_x = origin[0];
    resolve_args.origin_y = origin[1];
    if (!desk_size.empty()) {
      resolve_args.desk_half_width = desk_size[0];
      resolve_args.desk_half_depth = desk_size[1];
    }
    return cli::cmd_resolve(resolve_args, std::cout, std::cerr);
  }
  return cli::cmd_analyze(analyze_args, std::cout, std::cerr);
}
