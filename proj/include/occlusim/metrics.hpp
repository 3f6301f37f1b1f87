#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <span>
#include <vector>

namespace occlusim {

enum class Strategy { none, rdw, atr };

const char* to_string(Strategy s);
/// Throws parse_error for unknown names.
Strategy strategy_from_string(const std::string& s);

/// Pointed and true bearings, radians, both normalized to (-pi, pi].
struct PointingSample {
  double pointed = 0.0;
  double truth = 0.0;
};

struct OrientationReport {
  double signed_error = 0.0;  // degrees
  double absolute_error = 0.0;
  double configuration_error = 0.0;
  double ego_orientation_error = 0.0;
  int n = 0;
};

struct TeleportOutcome {
  bool occluded_at_preview = false;
  bool occluded_after_commit = false;
};

/// The occlusion flags of one trial that the efficacy ratios are built from.
struct TrialOutcome {
  bool occluded_at_travel_end = false;
  bool occluded_at_survey_end = false;
  std::vector<TeleportOutcome> teleports;
};

struct EfficacyReport {
  double occlusion_incidence = 0.0;
  double resolved_fraction = 0.0;
  int n_trials = 0;
};

/// Per-sample signed errors in degrees, each in (-180, 180].
std::vector<double> signed_errors(std::span<const PointingSample> samples);

/// Circular mean of signed errors (degrees), in (-180, 180].
double signed_error_mean(std::span<const double> errors_deg);
double absolute_error_mean(std::span<const double> errors_deg);
/// Mean absolute deviation from the circular mean.
double configuration_error(std::span<const double> errors_deg);
/// Circular mean of |e_i| read as angles, in [0, 180].
double ego_orientation_error(std::span<const double> errors_deg);

OrientationReport orientation_report(std::span<const PointingSample> samples);

/// Drops samples whose |signed error| exceeds threshold_deg (guess filter).
std::vector<PointingSample> drop_guesses(std::span<const PointingSample> samples,
                                         double threshold_deg);

/// Incidence counts the final travel teleport before any adjustment. ATR
/// resolution is counted per occluded preview, RDW (and the no-strategy
/// baseline) per trial between travel end and survey end. Throws
/// no_occlusion_observed when the denominator is zero.
EfficacyReport efficacy(std::span<const TrialOutcome> trials, Strategy strategy);
double occlusion_incidence(std::span<const TrialOutcome> trials);

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<double> centers;
  double wcss = 0.0;
  std::vector<double> wcss_history;  // after each Lloyd iteration
};

/// Lloyd's algorithm on the line with k-means++ seeding.
KMeansResult kmeans_1d(std::span<const double> values, int k, std::uint64_t seed);
/// Lloyd's algorithm from caller-chosen initial centers.
KMeansResult kmeans_1d_from(std::span<const double> values, std::vector<double> centers);

struct ElbowPoint {
  int k = 0;
  double wcss = 0.0;
};

/// Best-of-10 wcss for k = 1..k_max (truncated at the number of distinct values).
std::vector<ElbowPoint> elbow_curve(std::span<const double> values, int k_max,
                                    std::uint64_t seed);
/// k with the largest second difference of the curve; needs at least 3 points.
std::optional<int> elbow_knee(std::span<const ElbowPoint> curve);

}  // namespace occlusim
