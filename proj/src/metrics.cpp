#include "occlusim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "occlusim/error.hpp"
#include "occlusim/geometry.hpp"
#include "occlusim/rng.hpp"

namespace occlusim {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::rdw: return "rdw";
    case Strategy::atr: return "atr";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "none") return Strategy::none;
  if (s == "rdw") return Strategy::rdw;
  if (s == "atr") return Strategy::atr;
  throw Error(ErrorKind::parse_error, "unknown strategy '" + s + "'");
}

namespace {

constexpr double kMinResultant = 1e-9;

void require_nonempty(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::empty_data, "no samples");
}

// Degrees wrapped into (-180, 180].
double wrap_deg(double deg) {
  double r = std::remainder(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  return r;
}

// Radians to degrees for a value already in (-pi, pi]; conversion rounding
// must not push pi past 180.
double half_open_deg(double rad) {
  const double d = rad_to_deg(rad);
  if (d > 180.0) return 180.0;
  if (d <= -180.0) return 180.0;
  return d;
}

double circular_mean_rad(std::span<const double> errors_deg) {
  require_nonempty(errors_deg.size());
  double s = 0.0;
  double c = 0.0;
  for (double e : errors_deg) {
    s += std::sin(deg_to_rad(e));
    c += std::cos(deg_to_rad(e));
  }
  const double n = static_cast<double>(errors_deg.size());
  if (std::hypot(s / n, c / n) < kMinResultant) {
    throw Error(ErrorKind::undefined_mean, "resultant length vanishes");
  }
  return std::atan2(s, c);
}

}  // namespace

std::vector<double> signed_errors(std::span<const PointingSample> samples) {
  require_nonempty(samples.size());
  std::vector<double> out;
  out.reserve(samples.size());
  for (const PointingSample& s : samples) {
    out.push_back(half_open_deg(normalize_angle(s.pointed - s.truth)));
  }
  return out;
}

double signed_error_mean(std::span<const double> errors_deg) {
  return half_open_deg(normalize_angle(circular_mean_rad(errors_deg)));
}

double absolute_error_mean(std::span<const double> errors_deg) {
  require_nonempty(errors_deg.size());
  double sum = 0.0;
  for (double e : errors_deg) sum += std::abs(e);
  return sum / static_cast<double>(errors_deg.size());
}

double configuration_error(std::span<const double> errors_deg) {
  const double mean = signed_error_mean(errors_deg);
  double sum = 0.0;
  for (double e : errors_deg) sum += std::abs(wrap_deg(e - mean));
  return sum / static_cast<double>(errors_deg.size());
}

double ego_orientation_error(std::span<const double> errors_deg) {
  std::vector<double> magnitudes;
  magnitudes.reserve(errors_deg.size());
  for (double e : errors_deg) magnitudes.push_back(std::abs(e));
  // Unit vectors in the upper half plane: the mean direction lies in [0, 180].
  return std::clamp(rad_to_deg(circular_mean_rad(magnitudes)), 0.0, 180.0);
}

OrientationReport orientation_report(std::span<const PointingSample> samples) {
  const std::vector<double> e = signed_errors(samples);
  OrientationReport r;
  r.signed_error = signed_error_mean(e);
  r.absolute_error = absolute_error_mean(e);
  r.configuration_error = configuration_error(e);
  r.ego_orientation_error = ego_orientation_error(e);
  r.n = static_cast<int>(e.size());
  return r;
}

std::vector<PointingSample> drop_guesses(std::span<const PointingSample> samples,
                                         double threshold_deg) {
  std::vector<PointingSample> kept;
  for (const PointingSample& s : samples) {
    if (std::abs(half_open_deg(normalize_angle(s.pointed - s.truth))) <= threshold_deg) {
      kept.push_back(s);
    }
  }
  return kept;
}

double occlusion_incidence(std::span<const TrialOutcome> trials) {
  require_nonempty(trials.size());
  const auto hits = std::count_if(trials.begin(), trials.end(),
                                  [](const TrialOutcome& t) { return t.occluded_at_travel_end; });
  return static_cast<double>(hits) / static_cast<double>(trials.size());
}

EfficacyReport efficacy(std::span<const TrialOutcome> trials, Strategy strategy) {
  EfficacyReport r;
  r.occlusion_incidence = occlusion_incidence(trials);
  r.n_trials = static_cast<int>(trials.size());
  long occluded = 0;
  long resolved = 0;
  for (const TrialOutcome& t : trials) {
    if (strategy == Strategy::atr) {
      for (const TeleportOutcome& tp : t.teleports) {
        if (!tp.occluded_at_preview) continue;
        ++occluded;
        if (!tp.occluded_after_commit) ++resolved;
      }
    } else if (t.occluded_at_travel_end) {
      ++occluded;
      if (!t.occluded_at_survey_end) ++resolved;
    }
  }
  if (occluded == 0) throw Error(ErrorKind::no_occlusion_observed, "no occluded case to resolve");
  r.resolved_fraction = static_cast<double>(resolved) / static_cast<double>(occluded);
  return r;
}

namespace {

std::size_t distinct_count(std::span<const double> values) {
  return std::set<double>(values.begin(), values.end()).size();
}

double squared_distance_to_nearest(double v, const std::vector<double>& centers) {
  double best = std::numeric_limits<double>::infinity();
  for (double c : centers) best = std::min(best, (v - c) * (v - c));
  return best;
}

// k-means++: each new center is drawn with probability proportional to the
// squared distance to the nearest existing one.
void add_seeded_center(std::span<const double> values, std::vector<double>& centers, Rng& rng) {
  if (centers.empty()) {
    centers.push_back(values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng)]);
    return;
  }
  std::vector<double> weight(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    weight[i] = squared_distance_to_nearest(values[i], centers);
    total += weight[i];
  }
  if (total == 0.0) {
    centers.push_back(values.front());
    return;
  }
  const double r = uniform(rng, 0.0, total);
  double acc = 0.0;
  std::size_t pick = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weight[i] == 0.0) continue;
    acc += weight[i];
    pick = i;
    if (r < acc) break;
  }
  centers.push_back(values[pick]);
}

}  // namespace

KMeansResult kmeans_1d_from(std::span<const double> values, std::vector<double> centers) {
  require_nonempty(values.size());
  if (centers.empty()) throw Error(ErrorKind::invalid_input, "k must be >= 1");
  KMeansResult r;
  r.centers = std::move(centers);
  const std::size_t k = r.centers.size();
  r.assignments.assign(values.size(), -1);

  for (;;) {
    bool changed = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      int best = 0;
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = std::abs(values[i] - r.centers[c]);
        if (dc < std::abs(values[i] - r.centers[static_cast<std::size_t>(best)])) {
          best = static_cast<int>(c);
        }
      }
      if (best != r.assignments[i]) {
        r.assignments[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum[static_cast<std::size_t>(r.assignments[i])] += values[i];
      ++count[static_cast<std::size_t>(r.assignments[i])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) r.centers[c] = sum[c] / static_cast<double>(count[c]);
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - r.centers[static_cast<std::size_t>(r.assignments[i])];
      wcss += d * d;
    }
    r.wcss_history.push_back(wcss);
  }
  r.wcss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - r.centers[static_cast<std::size_t>(r.assignments[i])];
    r.wcss += d * d;
  }
  return r;
}

KMeansResult kmeans_1d(std::span<const double> values, int k, std::uint64_t seed) {
  require_nonempty(values.size());
  if (k < 1) throw Error(ErrorKind::invalid_input, "k must be >= 1");
  if (static_cast<std::size_t>(k) > distinct_count(values)) {
    throw Error(ErrorKind::infeasible_k, "k exceeds the number of distinct values");
  }
  Rng rng(seed);
  std::vector<double> centers;
  while (centers.size() < static_cast<std::size_t>(k)) add_seeded_center(values, centers, rng);
  return kmeans_1d_from(values, std::move(centers));
}

std::vector<ElbowPoint> elbow_curve(std::span<const double> values, int k_max,
                                    std::uint64_t seed) {
  require_nonempty(values.size());
  if (k_max < 1) throw Error(ErrorKind::invalid_input, "k_max must be >= 1");
  const int top = std::min(k_max, static_cast<int>(distinct_count(values)));
  constexpr int kRestarts = 10;

  std::vector<ElbowPoint> curve;
  KMeansResult previous;
  for (int k = 1; k <= top; ++k) {
    const std::string stream = "kmeans/" + std::to_string(k);
    KMeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < kRestarts; ++restart) {
      const std::uint64_t s = substream_seed(seed, stream + "/" + std::to_string(restart));
      KMeansResult candidate;
      if (restart == 0 && k > 1) {
        // Nested start: the best k-1 solution plus one seeded center, so the
        // curve cannot rise with k.
        Rng rng(s);
        std::vector<double> centers = previous.centers;
        add_seeded_center(values, centers, rng);
        candidate = kmeans_1d_from(values, std::move(centers));
      } else {
        candidate = kmeans_1d(values, k, s);
      }
      if (candidate.wcss < best.wcss) best = std::move(candidate);
    }
    curve.push_back({k, best.wcss});
    previous = std::move(best);
  }
  return curve;
}

std::optional<int> elbow_knee(std::span<const ElbowPoint> curve) {
  if (curve.size() < 3) return std::nullopt;
  std::size_t best = 1;
  double best_diff = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double d = curve[i - 1].wcss - 2.0 * curve[i].wcss + curve[i + 1].wcss;
    if (d > best_diff) {
      best_diff = d;
      best = i;
    }
  }
  return curve[best].k;
}

}  // namespace occlusim
