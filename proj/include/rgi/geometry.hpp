#pragma once

// Separable-room geometry: walls as oriented planes, image-microphone
// construction, label vectors and randomized room sampling.
//
// Coordinate frame: the loudspeaker array lies on the x-axis centred at the
// origin. The microphone sits in the z = 0 plane at y > 0 ("in front" of the
// array). Back wall is at -y, front at +y, right at +x, left at -x.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "rgi/error.hpp"

namespace rgi {

using Point3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;

/// Pairs closer than this cannot define a wall.
inline constexpr double kDegenerateImageEps = 1e-6;

struct PolarPoint {
  double rho = 0.0;        // meters
  double theta_deg = 0.0;  // angle to the array axis, [0, 180]
};

PolarPoint ToPolar(const Point3& p);

/// Plane {p : normal . p + distance = 0}; the room interior is the positive side.
struct Wall {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitY();
  double distance = 0.0;

  double SignedDistance(const Point3& p) const { return normal.dot(p) + distance; }
};

struct RoomGeometry {
  std::array<Wall, kNumSideWalls> side{};  // back, right, front, left
  double floor_distance = 0.0;
  double ceiling_distance = 0.0;

  /// All six surfaces; floor and ceiling normals are +z and -z.
  Wall wall(WallId id) const;
  double height() const { return floor_distance + ceiling_distance; }
  bool Contains(const Point3& p, double margin = 0.0) const;
};

/// Side wall with inward normal rotated by `deviation_deg` about +z away from
/// its axis-aligned direction.
Wall MakeSideWall(WallId id, double distance, double deviation_deg = 0.0);

/// Signed rotation (degrees) of a side wall normal away from its nominal axis.
double SideWallDeviationDeg(WallId id, const Wall& wall);

/// Axis-aligned room with the given wall distances.
RoomGeometry MakeShoebox(double back, double right, double front, double left,
                         double floor, double ceiling);

/// Corners of the side-wall polygon, counter-clockwise starting at the
/// back/right corner. Empty when the walls do not bound a convex
/// quadrilateral containing the origin with one edge per wall.
std::optional<std::array<Point2, 4>> SideWallPolygon(const RoomGeometry& room);

struct MicPose {
  Point3 position = Point3::Zero();
};

/// Image-microphone coordinates the estimator/network regresses.
struct LabelVector {
  Point2 mic = Point2::Zero();
  Point2 back = Point2::Zero();
  Point2 right = Point2::Zero();
  Point2 front = Point2::Zero();
  Point2 left = Point2::Zero();
  double floor_z = 0.0;
  double ceiling_z = 0.0;

  static constexpr int kSize = 12;

  const Point2& side(WallId id) const;
  Point2& side(WallId id);

  std::array<double, kSize> ToArray() const;
  static LabelVector FromArray(const std::array<double, kSize>& values);

  bool operator==(const LabelVector& other) const { return ToArray() == other.ToArray(); }
};

struct DistanceRange {
  double min = 0.0;
  double max = 0.0;
  bool Contains(double v, double slack = 0.0) const {
    return v >= min - slack && v <= max + slack;
  }
};

struct RoomConstraints {
  // Indexed by WallId; Table-1 style bounds from the origin to each wall.
  std::array<DistanceRange, kNumWalls> distance{{
      {0.2, 1.0},  // back
      {1.5, 3.0},  // right
      {3.0, 6.0},  // front
      {1.5, 3.0},  // left
      {0.5, 1.5},  // floor
      {0.7, 2.7},  // ceiling
  }};
  double max_deviation_deg = 15.0;
  double min_height = 2.2;
  double mic_clearance = 0.5;
  double array_half_width = 0.36;
  double absorption_lo = 0.1;
  double absorption_hi = 0.9;

  const DistanceRange& range(WallId id) const { return distance[static_cast<int>(id)]; }

  /// Ceiling range used when simulating: the array sits nearer the floor and
  /// the room is at least min_height tall, so the ceiling is at least
  /// min_height / 2 away.
  DistanceRange SimulationCeilingRange() const;

  /// Throws InvalidArgument if bounds are inconsistent.
  void Validate() const;
};

Wall WallFromImagePair(const Point3& mic, const Point3& image);
Point3 ReflectPoint(const Point3& p, const Wall& wall);

/// The front/back pair (rho cos, +rho sin, 0) and (rho cos, -rho sin, 0).
std::pair<Point3, Point3> SideWallCandidates(const PolarPoint& pp);

/// Floor/ceiling distance from the radial distance of its first-order image.
double FloorCeilingDistance(double rho, double rho_mic);

LabelVector LabelsFromRoom(const RoomGeometry& room, const MicPose& mic);

/// Throws DegenerateImage tagged with the offending wall.
RoomGeometry RoomFromLabels(const LabelVector& labels);

struct SampledRoom {
  RoomGeometry room;
  MicPose mic;
  std::array<double, kNumWalls> absorption{};
};

/// Deterministic per seed. Throws SamplingExhausted after 10,000 rejections.
SampledRoom SampleRoom(const RoomConstraints& constraints, std::uint64_t seed);

/// Re-checks every sampling constraint; returns false with no side effects.
bool SatisfiesConstraints(const SampledRoom& sample, const RoomConstraints& constraints,
                          double tol = 1e-9);

/// Distance from p to the array segment on the x-axis.
double DistanceToArray(const Point3& p, double array_half_width);

}  // namespace rgi
