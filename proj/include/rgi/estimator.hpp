#pragma once

// Deterministic, non-learned reference estimator: reads the microphone and
// first-order image-microphone positions off a normalized Radon map using
// the room constraints as priors, and converts label vectors to rooms.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rgi/geometry.hpp"
#include "rgi/radon.hpp"

namespace rgi {

struct PeakCandidate {
  int n = 0;
  int theta_index = 0;
  double theta_deg = 0.0;
  double rho = 0.0;
  double amplitude = 0.0;
};

/// Local maxima over a (2*sep_n+1) x (2*sep_theta+1) neighbourhood with
/// amplitude >= min_prominence, sorted by descending amplitude, then earlier
/// n, then lower theta. Plateaus yield one peak: among equal values the
/// earliest (n, theta) wins.
std::vector<PeakCandidate> DetectPeaks(const RadonMap& map, double min_prominence = 0.05,
                                       int sep_n = 8, double sep_theta_deg = 3.0);

struct EstimatorOptions {
  double min_prominence = 0.05;
  int sep_n = 8;
  double sep_theta_deg = 3.0;
  /// Minimum normalized amplitude for the direct path.
  double direct_min_amplitude = 0.3;
  /// Minimum normalized amplitude for a first-order echo.
  double echo_min_amplitude = 0.25;
  /// Angular half-width of the floor/ceiling search around the predicted cone angle.
  double floor_theta_tol_deg = 2.0;
  /// Tolerances for matching a predicted image position to a peak.
  double match_rho_m = 0.05;
  double match_theta_deg = 2.0;
  /// Earliest candidates per side wall kept for the joint assignment.
  int max_wall_candidates = 8;
  /// Slack on the distance/orientation priors when testing candidates.
  double prior_slack_m = 0.05;
  double prior_slack_deg = 2.0;
  /// Sub-cell refinement of peak locations by 3-point parabola fits.
  bool refine = true;
  /// When a wall has no candidate, fill it from the middle of its prior window
  /// instead of throwing MissingWallPeak.
  bool fallback_to_prior = false;
};

/// Polar search window for one target.
struct PolarWindow {
  double rho_min = 0.0;
  double rho_max = 0.0;
  double theta_min_deg = 0.0;
  double theta_max_deg = 180.0;

  bool Contains(double rho, double theta_deg) const {
    return rho >= rho_min && rho <= rho_max && theta_deg >= theta_min_deg &&
           theta_deg <= theta_max_deg;
  }
};

/// Search windows derived from the constraints and an estimated microphone
/// position. Index order is WallId; floor/ceiling windows are radial bands.
struct PriorRegions {
  PolarWindow mic;
  std::array<PolarWindow, kNumWalls> walls{};
};

PriorRegions BuildPriorRegions(const RoomConstraints& constraints, const Point3& mic,
                               const RadonGrid& grid);

struct EstimateResult {
  LabelVector labels;
  PeakCandidate direct;
  /// Walls that fell back to the prior window middle.
  std::vector<WallId> fallbacks;
  /// Floor and ceiling candidates overlapped in their radial bands.
  bool floor_ceiling_ambiguous = false;
};

/// Throws MissingDirectPath, or MissingWallPeak (tagged) unless
/// options.fallback_to_prior is set.
EstimateResult EstimateLabelsDetailed(const RadonMap& map, const RoomConstraints& constraints,
                                      const EstimatorOptions& options = {});

LabelVector EstimateLabels(const RadonMap& map, const RoomConstraints& constraints,
                           const EstimatorOptions& options = {});

RoomGeometry InferRoom(const LabelVector& labels);

inline constexpr const char* kReferenceEstimatorName = "radon-peak-reference";

/// LabelVector JSON: the 12 named coordinates plus sample_id, estimator and
/// grid_hash metadata.
struct LabelRecord {
  std::string sample_id;
  std::string estimator;
  std::string grid_hash;
  LabelVector labels;
};

nlohmann::ordered_json LabelRecordToJson(const LabelRecord& record);
/// Throws InvalidArgument on a missing or non-numeric field.
LabelRecord LabelRecordFromJson(const nlohmann::ordered_json& j);

/// Prediction files are a JSON array of label records.
void WritePredictions(const std::string& path, const std::vector<LabelRecord>& records);
std::vector<LabelRecord> ReadPredictions(const std::string& path);

}  // namespace rgi
