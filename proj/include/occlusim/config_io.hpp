#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "occlusim/agent.hpp"
#include "occlusim/metrics.hpp"
#include "occlusim/redirect.hpp"
#include "occlusim/resolver.hpp"
#include "occlusim/scenario.hpp"

namespace occlusim {

/// Everything one `run` needs. Angles in config files are written in degrees.
struct RunConfig {
  Strategy strategy = Strategy::none;
  std::optional<std::string> scene_file;
  std::optional<SceneConfig> scene;
  WorkspaceLayout layout;
  AgentConfig agent;
  GainConfig gains;
  ResolutionConstraints constraints;
  int n_trials = 15;
  std::string output_dir = "run";
  std::uint64_t seed = 1;

  /// Throws invalid_input unless exactly one scene source is set.
  void validate() const;
  ExperimentConfig experiment() const;
  /// Inline scene configs draw their seed from the run seed's "scene" substream.
  SceneConfig effective_scene_config() const;
};

// All readers throw parse_error naming the offending field; unknown fields are rejected.
SceneConfig scene_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SceneConfig& c);
AgentConfig agent_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const AgentConfig& c);
GainConfig gain_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const GainConfig& c);
ResolutionConstraints constraints_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ResolutionConstraints& c);
WorkspaceLayout layout_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const WorkspaceLayout& l);
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RunConfig& c);

/// Parses JSON text; syntax errors become parse_error with line/column context.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);

/// Throws io_error.
std::string read_file(const std::string& path);
/// Writes to a sibling temporary file and renames it over `path`. Throws io_error.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace occlusim
