#include "rgi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include <Eigen/Geometry>

namespace rgi {

namespace {

constexpr double kUnitTolerance = 1e-6;

ColumnStats Stats(const std::vector<double>& v) {
  ColumnStats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(v.size()));
  return s;
}

std::string Row(const char* label, const ColumnStats& d, const ColumnStats* theta) {
  char buf[128];
  if (theta) {
    std::snprintf(buf, sizeof(buf), "%-8s %10.3f +- %-8.3f %10.3f +- %-8.3f\n", label,
                  d.mean * 100.0, d.std * 100.0, theta->mean, theta->std);
  } else {
    std::snprintf(buf, sizeof(buf), "%-8s %10.3f +- %-8.3f %16s\n", label, d.mean * 100.0,
                  d.std * 100.0, "-");
  }
  return buf;
}

nlohmann::ordered_json StatsJson(const ColumnStats& s) {
  return {{"mean", s.mean}, {"std", s.std}};
}

}  // namespace

WallError ComputeWallError(const Wall& truth, const Wall& estimate) {
  if (std::abs(truth.normal.norm() - 1.0) > kUnitTolerance ||
      std::abs(estimate.normal.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kNonUnitNormal, "wall normal is not unit length");
  }
  WallError e;
  e.eps_d = std::abs(truth.distance - estimate.distance);
  // Same angle as acos of the dot product, but resolves nearly parallel normals.
  const double cross = truth.normal.cross(estimate.normal).norm();
  e.eps_theta_deg = std::atan2(cross, truth.normal.dot(estimate.normal)) * 180.0 / std::numbers::pi;
  return e;
}

RoomError ComputeRoomError(const RoomGeometry& truth, const RoomGeometry& estimate) {
  RoomError r;
  double sum_d = 0.0;
  double sum_t = 0.0;
  for (int i = 0; i < kNumWalls; ++i) {
    const WallId id = static_cast<WallId>(i);
    r.walls[i] = ComputeWallError(truth.wall(id), estimate.wall(id));
    sum_d += r.walls[i].eps_d * r.walls[i].eps_d;
    if (i < kNumSideWalls) {
      sum_t += *r.walls[i].eps_theta_deg * *r.walls[i].eps_theta_deg;
    } else {
      r.walls[i].eps_theta_deg.reset();
    }
  }
  r.e_d = std::sqrt(sum_d / kNumWalls);
  r.e_theta_deg = std::sqrt(sum_t / kNumSideWalls);
  return r;
}

AggregateReport Aggregate(std::span<const RoomError> errors) {
  if (errors.empty()) throw Error(ErrorCode::kEmptyInput, "no room errors to aggregate");
  AggregateReport rep;
  rep.count = errors.size();
  std::vector<double> col(errors.size());
  auto fill = [&](auto&& get) {
    std::transform(errors.begin(), errors.end(), col.begin(), get);
    return Stats(col);
  };
  for (int i = 0; i < kNumWalls; ++i) {
    rep.wall_d[i] = fill([i](const RoomError& e) { return e.walls[i].eps_d; });
  }
  for (int i = 0; i < kNumSideWalls; ++i) {
    rep.wall_theta[i] = fill([i](const RoomError& e) { return e.walls[i].eps_theta_deg.value_or(0.0); });
  }
  rep.room_d = fill([](const RoomError& e) { return e.e_d; });
  rep.room_theta = fill([](const RoomError& e) { return e.e_theta_deg; });
  return rep;
}

std::string RenderReportTable(const AggregateReport& report) {
  static constexpr const char* kLabels[] = {"Back", "Right", "Front", "Left", "Floor", "Ceiling"};
  std::string out = "# mean +- std over " + std::to_string(report.count) +
                    " rooms (population std)\n";
  char head[128];
  std::snprintf(head, sizeof(head), "%-8s %22s %22s\n", "Wall", "Distance err. [cm]",
                "Orientation err. [deg]");
  out += head;
  for (int i = 0; i < kNumWalls; ++i) {
    out += Row(kLabels[i], report.wall_d[i], i < kNumSideWalls ? &report.wall_theta[i] : nullptr);
  }
  out += Row("Room", report.room_d, &report.room_theta);
  return out;
}

nlohmann::ordered_json ReportToJson(const AggregateReport& report) {
  nlohmann::ordered_json j;
  j["count"] = report.count;
  j["std_convention"] = "population";
  j["units"] = {{"distance", "m"}, {"orientation", "deg"}};
  nlohmann::ordered_json walls = nlohmann::ordered_json::object();
  for (int i = 0; i < kNumWalls; ++i) {
    nlohmann::ordered_json w;
    w["distance"] = StatsJson(report.wall_d[i]);
    if (i < kNumSideWalls) w["orientation"] = StatsJson(report.wall_theta[i]);
    walls[std::string(WallName(static_cast<WallId>(i)))] = w;
  }
  j["walls"] = walls;
  j["room"] = {{"E_d", StatsJson(report.room_d)}, {"E_theta", StatsJson(report.room_theta)}};
  return j;
}

}  // namespace rgi
