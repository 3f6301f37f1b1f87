#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occlusim/agent.hpp"
#include "occlusim/mapping.hpp"
#include "occlusim/metrics.hpp"
#include "occlusim/scenario.hpp"

namespace occlusim {

inline constexpr const char* kTraceFormat = "occlusim-trace";
inline constexpr int kTraceFormatVersion = 1;

/// Everything the header line carries. `config` is the resolved run config as
/// written to disk; `layout` and `initial_mapping` are kept exact for replay.
struct TraceHeader {
  std::string version;
  Strategy strategy = Strategy::none;
  std::uint64_t seed = 0;
  int n_trials = 0;
  double dt = 0.0;
  nlohmann::ordered_json config;
  WorkspaceLayout layout;
  WorldMapping initial_mapping;
};

/// JSON Lines: header, then per trial its frames and events in emission
/// order followed by one trial line, then a footer with the final mapping.
void write_trace(std::ostream& out, const TraceHeader& header, const ExperimentResult& result);
std::string render_trace(const TraceHeader& header, const ExperimentResult& result);

struct ParsedTrace {
  TraceHeader header;
  std::vector<TrialRow> rows;
  std::vector<TrialOutcome> outcomes;
  std::vector<PointingSample> pointing;
  WorldMapping final_mapping;
  std::size_t frames = 0;
};

/// Reads the summary-level content of a trace. Throws parse_error with the
/// line number on malformed input.
ParsedTrace parse_trace(std::istream& in);

struct ReplayReport {
  WorldMapping final_mapping;
  std::size_t frames = 0;
  std::size_t adjustments = 0;  // teleports plus redirect events
  bool consistent = true;  // every recorded mapping and frame matched bit for bit
  std::string first_mismatch;
};

/// Re-applies the logged teleports and redirect increments from the initial
/// mapping and checks each recorded mapping and frame against the result.
ReplayReport replay_trace(std::istream& in);

/// Summary tables. Numbers use 9 significant digits in CSV; JSON carries the
/// same values at full precision.
std::string summary_csv(const std::vector<TrialRow>& rows);
nlohmann::ordered_json summary_json(Strategy strategy, const ExperimentSummary& summary);

/// Report objects; null when the metric is undefined for the data
/// (no occlusion observed, no pointing samples, no defined circular mean).
nlohmann::ordered_json efficacy_json(std::span<const TrialOutcome> outcomes, Strategy strategy);
nlohmann::ordered_json orientation_json(std::span<const PointingSample> samples);

/// printf-style "%.9g".
std::string format_number(double v);

}  // namespace occlusim
