#include "occlusim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include "occlusim/agent.hpp"
#include "occlusim/resolver.hpp"
#include "occlusim/rng.hpp"
#include "occlusim/trace_io.hpp"

#ifndef OCCLUSIM_VERSION
#define OCCLUSIM_VERSION "0.0.0"
#endif

namespace occlusim::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse_error:
    case ErrorKind::invalid_input:
    case ErrorKind::invalid_query:
    case ErrorKind::infeasible_k:
    case ErrorKind::empty_data:
      return usage;
    case ErrorKind::generation_failure:
      return generation;
    case ErrorKind::io_error:
      return io;
    case ErrorKind::scenario_error:
    case ErrorKind::invalid_target:
    case ErrorKind::degenerate_geometry:
    case ErrorKind::internal_error:
    case ErrorKind::undefined_mean:
    case ErrorKind::no_occlusion_observed:
      return scenario;
  }
  return scenario;
}

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return scenario;
  }
}

// A config that cannot be read is a usage problem, not an output failure.
nlohmann::json read_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::parse_error, e.detail());
  }
  return parse_json_text(text, path);
}

Scene scene_for(const RunConfig& c) {
  if (c.scene_file) return load_scene(read_file(*c.scene_file));
  return generate_scene(c.effective_scene_config());
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

}  // namespace

RunConfig load_run_config(const std::string& path, const RunOverrides& o) {
  RunConfig c = run_config_from_json(read_config(path));
  if (o.strategy) c.strategy = strategy_from_string(*o.strategy);
  if (o.seed) c.seed = *o.seed;
  if (o.n_trials) {
    if (*o.n_trials < 0) throw Error(ErrorKind::parse_error, "--n-trials must be >= 0");
    c.n_trials = *o.n_trials;
  }
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.scene_file) {
    c.scene_file = *o.scene_file;
    c.scene.reset();
  }
  // Relative scene paths are taken relative to the config file.
  if (c.scene_file && !o.scene_file && fs::path(*c.scene_file).is_relative()) {
    c.scene_file = (fs::path(path).parent_path() / *c.scene_file).string();
  }
  return c;
}

int cmd_generate(const std::string& config_path, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const SceneConfig config = scene_config_from_json(read_config(config_path));
    const Scene scene = generate_scene(config);
    write_file_atomic(out_path, save_scene(scene));
    const double hectares = scene.bounds.width() * scene.bounds.height() / 10000.0;
    out << "trees: " << scene.trees.size() << '\n'
        << "density: " << format_number(static_cast<double>(scene.trees.size()) / hectares)
        << " trees/ha\n"
        << "targets: " << scene.targets.size() << '\n';
    return ok;
  });
}

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load_run_config(config_path, overrides);
    c.validate();
    const Scene scene = scene_for(c);
    const ExperimentConfig ec = c.experiment();
    const ExperimentResult result = run_experiment(scene, ec);

    TraceHeader h;
    h.version = OCCLUSIM_VERSION;
    h.strategy = c.strategy;
    h.seed = c.seed;
    h.n_trials = c.n_trials;
    h.dt = c.agent.dt;
    h.config = to_json(c);
    h.layout = c.layout;
    h.initial_mapping = result.initial_mapping;

    const ExperimentSummary summary = summarize(result);
    write_file_atomic(join(c.output_dir, "trace.jsonl"), render_trace(h, result));
    write_file_atomic(join(c.output_dir, "summary.csv"), summary_csv(summary.rows));
    write_file_atomic(join(c.output_dir, "summary.json"),
                      summary_json(c.strategy, summary).dump(2) + "\n");

    out << "strategy: " << to_string(c.strategy) << '\n'
        << "trials: " << summary.rows.size() << '\n';
    const ojson eff = efficacy_json(summary.outcomes, c.strategy);
    if (!eff.is_null()) {
      out << "occlusion_incidence: " << format_number(eff["occlusion_incidence"].get<double>())
          << '\n'
          << "resolved_fraction: " << format_number(eff["resolved_fraction"].get<double>()) << '\n';
    }
    out << "output: " << c.output_dir << '\n';
    return ok;
  });
}

namespace {

struct SweepCell {
  GainConfig gains;
  std::optional<int> tree_count;
};

std::vector<double> grid_values(const nlohmann::json& grid, const char* key, double base) {
  const auto it = grid.find(key);
  if (it == grid.end()) return {base};
  if (!it->is_array() || it->empty()) {
    throw Error(ErrorKind::parse_error, std::string("grid field '") + key + "': expected a non-empty array");
  }
  std::vector<double> v;
  for (const auto& x : *it) {
    if (!x.is_number()) throw Error(ErrorKind::parse_error, std::string("grid field '") + key + "': expected numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<SweepCell> expand_grid(const nlohmann::json& grid, const RunConfig& base) {
  if (!grid.is_object()) throw Error(ErrorKind::parse_error, "grid: expected a JSON object");
  for (const auto& item : grid.items()) {
    const std::string& k = item.key();
    if (k != "rotation_gain" && k != "translation_gain" && k != "curvature_gain_deg_per_m" &&
        k != "tree_count") {
      throw Error(ErrorKind::parse_error, "unknown grid field '" + k + "'");
    }
  }
  const auto rot = grid_values(grid, "rotation_gain", base.gains.rotation_gain);
  const auto tr = grid_values(grid, "translation_gain", base.gains.translation_gain);
  const auto curv = grid_values(grid, "curvature_gain_deg_per_m", base.gains.curvature_gain);
  std::vector<std::optional<int>> trees{std::nullopt};
  if (grid.contains("tree_count")) {
    if (!base.scene) {
      throw Error(ErrorKind::parse_error, "grid field 'tree_count' needs an inline scene config");
    }
    trees.clear();
    for (const double t : grid_values(grid, "tree_count", 0.0)) {
      if (t != std::floor(t) || t < 0.0 || t > 1e9) {
        throw Error(ErrorKind::parse_error, "grid field 'tree_count': expected whole numbers");
      }
      trees.push_back(static_cast<int>(t));
    }
  }

  std::vector<SweepCell> cells;
  for (const double r : rot) {
    for (const double t : tr) {
      for (const double c : curv) {
        for (const auto& n : trees) {
          SweepCell cell;
          cell.gains.rotation_gain = r;
          cell.gains.translation_gain = t;
          cell.gains.curvature_gain = c;
          try {
            cell.gains.validate();
          } catch (const Error& e) {
            throw Error(ErrorKind::parse_error, "grid: " + e.detail());
          }
          cell.tree_count = n;
          cells.push_back(cell);
        }
      }
    }
  }
  return cells;
}

}  // namespace

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig base = load_run_config(args.config_path, args.overrides);
    base.validate();
    if (args.seeds < 1) throw Error(ErrorKind::parse_error, "--seeds must be >= 1");
    const std::vector<SweepCell> cells = expand_grid(read_config(args.grid_path), base);

    std::shared_ptr<const Scene> shared;
    if (base.scene_file) shared = std::make_shared<const Scene>(load_scene(read_file(*base.scene_file)));

    std::vector<BatchJob> jobs;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      for (int s = 0; s < args.seeds; ++s) {
        RunConfig rc = base;
        rc.seed = base.seed + static_cast<std::uint64_t>(s);
        rc.gains = cells[ci].gains;
        BatchJob job;
        job.config = rc.experiment();
        job.label = "cell " + std::to_string(ci) + " (seed " + std::to_string(rc.seed) + ")";
        if (shared) {
          job.scene = shared;
        } else {
          SceneConfig sc = rc.effective_scene_config();
          if (cells[ci].tree_count) sc.tree_count = *cells[ci].tree_count;
          job.scene_config = sc;
        }
        jobs.push_back(std::move(job));
      }
    }

    const std::vector<ExperimentSummary> results =
        args.serial ? run_batch_serial(jobs) : run_batch_parallel(jobs);

    std::string csv =
        "cell,rotation_gain,translation_gain,curvature_gain_deg_per_m,tree_count,seeds,trials,"
        "occlusion_incidence,resolved_fraction,mean_abs_applied_rotation_deg\n";
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      std::vector<TrialOutcome> outcomes;
      double applied = 0.0;
      for (int s = 0; s < args.seeds; ++s) {
        const ExperimentSummary& r = results[ci * static_cast<std::size_t>(args.seeds) +
                                             static_cast<std::size_t>(s)];
        outcomes.insert(outcomes.end(), r.outcomes.begin(), r.outcomes.end());
        for (const TrialRow& row : r.rows) {
          applied += std::abs(row.teleport_adjustment_total_deg) +
                     std::abs(row.redirect_rotation_total_deg);
        }
      }
      const SweepCell& cell = cells[ci];
      const ojson eff = efficacy_json(outcomes, base.strategy);
      std::string tree_count;
      if (cell.tree_count) {
        tree_count = std::to_string(*cell.tree_count);
      } else if (base.scene) {
        tree_count = std::to_string(base.scene->tree_count);
      }
      csv += std::to_string(ci) + ',' + format_number(cell.gains.rotation_gain) + ',' +
             format_number(cell.gains.translation_gain) + ',' +
             format_number(cell.gains.curvature_gain) + ',' + tree_count + ',' +
             std::to_string(args.seeds) + ',' + std::to_string(outcomes.size()) + ',' +
             (outcomes.empty() ? "" : format_number(occlusion_incidence(outcomes))) + ',' +
             (eff.is_null() ? "" : format_number(eff["resolved_fraction"].get<double>())) + ',' +
             (outcomes.empty() ? ""
                               : format_number(applied / static_cast<double>(outcomes.size()))) +
             '\n';
    }
    const std::string path = args.out_path.value_or(join(base.output_dir, "sweep.csv"));
    write_file_atomic(path, csv);
    out << "cells: " << cells.size() << '\n' << "output: " << path << '\n';
    return ok;
  });
}

namespace {

Turn lock_from_string(const std::string& s) {
  if (s == "none") return Turn::none;
  if (s == "ccw") return Turn::ccw;
  if (s == "cw") return Turn::cw;
  throw Error(ErrorKind::parse_error, "unknown rotation lock '" + s + "' (expected none, cw or ccw)");
}

}  // namespace

int cmd_resolve(const ResolveArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scene scene = load_scene(read_file(a.scene_path));

    ResolutionConstraints c;
    c.max_rotation = deg_to_rad(a.max_rotation_deg);
    c.max_translation = a.max_translation;
    c.rotation_step = deg_to_rad(a.rotation_step_deg);
    c.translation_step = a.translation_step;
    c.direction_lock = lock_from_string(a.lock);
    OrientedRect desk;
    Vec2 origin;
    try {
      c.validate();
      desk = OrientedRect(Vec2{a.desk_x, a.desk_y}, a.desk_half_width, a.desk_half_depth,
                          deg_to_rad(a.desk_yaw_deg));
      origin = Vec2{a.origin_x, a.origin_y};
    } catch (const Error& e) {
      throw Error(ErrorKind::parse_error, e.detail());
    }

    // Rotation about the origin keeps the desk's distance; sliding only shortens it.
    const double reach = (desk.center - origin).norm() + desk.circumradius();
    const std::vector<Circle> obstacles = scene.obstacles_near(origin, reach);
    ResolutionOutcome o;
    try {
      o = find_occlusion_free(ResolutionQuery{origin, desk, obstacles, c});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::degenerate_geometry || e.kind() == ErrorKind::invalid_input) {
        throw Error(ErrorKind::parse_error, e.detail());
      }
      throw;
    }

    ojson j;
    j["status"] = to_string(o.status);
    j["rotation_delta_deg"] = rad_to_deg(o.rotation_delta);
    j["rotation_delta"] = o.rotation_delta;
    j["translation_delta"] = o.translation_delta;
    if (o.usable()) {
      j["cost"] = o.cost;
    } else {
      j["cost"] = nullptr;
    }
    j["resolved_desk"] = {{"center", {o.resolved_desk.center.x, o.resolved_desk.center.y}},
                          {"yaw_deg", rad_to_deg(o.resolved_desk.yaw)},
                          {"half_width", o.resolved_desk.half_width},
                          {"half_depth", o.resolved_desk.half_depth}};
    out << j.dump(2) << '\n';
    return o.usable() ? ok : unresolved;
  });
}

namespace {

std::optional<double> column_value(const TrialRow& r, const std::string& column) {
  if (column == "travel_time") return r.travel_time;
  if (column == "survey_time") return r.survey_time;
  if (column == "teleport_adjustment_total_deg") return r.teleport_adjustment_total_deg;
  if (column == "redirect_rotation_total_deg") return r.redirect_rotation_total_deg;
  if (column == "pointing_signed_error_deg") return r.pointing_signed_error_deg;
  throw Error(ErrorKind::parse_error, "unknown --elbow column '" + column + "'");
}

}  // namespace

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (a.traces.empty()) throw Error(ErrorKind::parse_error, "no trace files given");
    if (a.k_max < 1) throw Error(ErrorKind::parse_error, "--k-max must be >= 1");

    std::vector<ParsedTrace> traces;
    for (const std::string& path : a.traces) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path + "'");
      try {
        traces.push_back(parse_trace(in));
      } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.detail());
      }
    }
    const Strategy strategy = traces.front().header.strategy;
    for (std::size_t i = 1; i < traces.size(); ++i) {
      if (traces[i].header.strategy != strategy) {
        throw Error(ErrorKind::parse_error,
                    "mixed strategies: '" + a.traces.front() + "' is " + to_string(strategy) +
                        ", '" + a.traces[i] + "' is " + to_string(traces[i].header.strategy));
      }
    }

    std::vector<TrialOutcome> outcomes;
    std::vector<PointingSample> pointing;
    std::vector<TrialRow> rows;
    std::string csv = "trace," + summary_csv({});
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const ParsedTrace& t = traces[i];
      outcomes.insert(outcomes.end(), t.outcomes.begin(), t.outcomes.end());
      pointing.insert(pointing.end(), t.pointing.begin(), t.pointing.end());
      rows.insert(rows.end(), t.rows.begin(), t.rows.end());
      std::istringstream body(summary_csv(t.rows));
      std::string line;
      std::getline(body, line);  // column names
      while (std::getline(body, line)) csv += std::to_string(i) + ',' + line + '\n';
    }
    if (a.drop_guesses_deg) pointing = drop_guesses(pointing, *a.drop_guesses_deg);

    ojson j;
    j["strategy"] = to_string(strategy);
    j["traces"] = traces.size();
    j["n_trials"] = rows.size();
    j["orientation"] = orientation_json(pointing);
    j["efficacy"] = efficacy_json(outcomes, strategy);

    if (a.elbow_column) {
      std::vector<double> values;
      for (const TrialRow& r : rows) {
        if (const auto v = column_value(r, *a.elbow_column)) values.push_back(*v);
      }
      ojson e;
      e["column"] = *a.elbow_column;
      e["k_max"] = a.k_max;
      e["n"] = values.size();
      e["curve"] = ojson::array();
      e["knee"] = nullptr;
      if (!values.empty()) {
        const auto seed = substream_seed(traces.front().header.seed, "kmeans");
        const std::vector<ElbowPoint> curve = elbow_curve(values, a.k_max, seed);
        for (const ElbowPoint& p : curve) e["curve"].push_back({{"k", p.k}, {"wcss", p.wcss}});
        if (const auto knee = elbow_knee(curve)) e["knee"] = *knee;
      }
      j["elbow"] = e;
    }

    if (a.csv_path) write_file_atomic(*a.csv_path, csv);
    out << j.dump(2) << '\n';
    return ok;
  });
}

}  // namespace occlusim::cli
