#pragma once

// Wall- and room-level geometry errors and their mean/std aggregation.

#include <array>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "rgi/geometry.hpp"

namespace rgi {

struct WallError {
  double eps_d = 0.0;                  // meters
  std::optional<double> eps_theta_deg;  // side walls only
};

/// |d - d_hat| and arccos<v, v_hat>. Throws NonUnitNormal when either normal
/// deviates from unit length by more than 1e-6.
WallError ComputeWallError(const Wall& truth, const Wall& estimate);

struct RoomError {
  std::array<WallError, kNumWalls> walls{};
  double e_d = 0.0;          // RMS over all six surfaces, meters
  double e_theta_deg = 0.0;  // RMS over the four side walls
};

RoomError ComputeRoomError(const RoomGeometry& truth, const RoomGeometry& estimate);

struct ColumnStats {
  double mean = 0.0;
  double std = 0.0;  // population convention (divide by n)
};

struct AggregateReport {
  std::size_t count = 0;
  std::array<ColumnStats, kNumWalls> wall_d{};
  std::array<ColumnStats, kNumSideWalls> wall_theta{};
  ColumnStats room_d;
  ColumnStats room_theta;
};

/// Throws EmptyInput on an empty list.
AggregateReport Aggregate(std::span<const RoomError> errors);

/// Aligned text table in centimeters/degrees, rows Back..Ceiling then Room.
std::string RenderReportTable(const AggregateReport& report);
nlohmann::ordered_json ReportToJson(const AggregateReport& report);

}  // namespace rgi
