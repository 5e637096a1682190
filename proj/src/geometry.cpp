#include "rgi/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rgi/random.hpp"

namespace rgi {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr int kMaxSamplingAttempts = 10000;

Eigen::Vector2d NominalSideNormal(WallId id) {
  switch (id) {
    case WallId::kBack:
      return {0.0, 1.0};
    case WallId::kRight:
      return {-1.0, 0.0};
    case WallId::kFront:
      return {0.0, -1.0};
    case WallId::kLeft:
      return {1.0, 0.0};
    default:
      throw Error(ErrorCode::kInvalidArgument, "not a side wall", id);
  }
}

WallId SideId(int i) { return static_cast<WallId>(i); }

std::optional<Point2> IntersectLines(const Wall& a, const Wall& b) {
  Eigen::Matrix2d m;
  m << a.normal.x(), a.normal.y(), b.normal.x(), b.normal.y();
  const double det = m.determinant();
  if (std::abs(det) < 1e-12) return std::nullopt;
  return m.inverse() * Eigen::Vector2d(-a.distance, -b.distance);
}

}  // namespace

std::string_view WallName(WallId id) {
  switch (id) {
    case WallId::kBack:
      return "back";
    case WallId::kRight:
      return "right";
    case WallId::kFront:
      return "front";
    case WallId::kLeft:
      return "left";
    case WallId::kFloor:
      return "floor";
    case WallId::kCeiling:
      return "ceiling";
  }
  return "unknown";
}

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateImage:
      return "DegenerateImage";
    case ErrorCode::kInvalidRadii:
      return "InvalidRadii";
    case ErrorCode::kMicOutsideRoom:
      return "MicOutsideRoom";
    case ErrorCode::kSourceOutsideRoom:
      return "SourceOutsideRoom";
    case ErrorCode::kSamplingExhausted:
      return "SamplingExhausted";
    case ErrorCode::kGridMismatch:
      return "GridMismatch";
    case ErrorCode::kMissingDirectPath:
      return "MissingDirectPath";
    case ErrorCode::kMissingWallPeak:
      return "MissingWallPeak";
    case ErrorCode::kNotFound:
      return "NotFound";
    case ErrorCode::kCorruptRecord:
      return "CorruptRecord";
    case ErrorCode::kNonUnitNormal:
      return "NonUnitNormal";
    case ErrorCode::kEmptyInput:
      return "EmptyInput";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kIo:
      return "IoError";
  }
  return "Unknown";
}

PolarPoint ToPolar(const Point3& p) {
  const double rho = p.norm();
  if (rho == 0.0) return {0.0, 0.0};
  const double c = std::clamp(p.x() / rho, -1.0, 1.0);
  return {rho, std::acos(c) / kDegToRad};
}

Wall RoomGeometry::wall(WallId id) const {
  switch (id) {
    case WallId::kFloor:
      return {Eigen::Vector3d::UnitZ(), floor_distance};
    case WallId::kCeiling:
      return {-Eigen::Vector3d::UnitZ(), ceiling_distance};
    default:
      return side[static_cast<int>(id)];
  }
}

bool RoomGeometry::Contains(const Point3& p, double margin) const {
  for (int i = 0; i < kNumWalls; ++i) {
    if (!(wall(static_cast<WallId>(i)).SignedDistance(p) > margin)) return false;
  }
  return true;
}

Wall MakeSideWall(WallId id, double distance, double deviation_deg) {
  const Eigen::Vector2d n0 = NominalSideNormal(id);
  const double c = std::cos(deviation_deg * kDegToRad);
  const double s = std::sin(deviation_deg * kDegToRad);
  return {Eigen::Vector3d(c * n0.x() - s * n0.y(), s * n0.x() + c * n0.y(), 0.0), distance};
}

double SideWallDeviationDeg(WallId id, const Wall& wall) {
  const Eigen::Vector2d n0 = NominalSideNormal(id);
  const double cross = n0.x() * wall.normal.y() - n0.y() * wall.normal.x();
  const double dot = n0.x() * wall.normal.x() + n0.y() * wall.normal.y();
  return std::atan2(cross, dot) / kDegToRad;
}

RoomGeometry MakeShoebox(double back, double right, double front, double left,
                         double floor, double ceiling) {
  RoomGeometry room;
  room.side = {MakeSideWall(WallId::kBack, back), MakeSideWall(WallId::kRight, right),
               MakeSideWall(WallId::kFront, front), MakeSideWall(WallId::kLeft, left)};
  room.floor_distance = floor;
  room.ceiling_distance = ceiling;
  return room;
}

std::optional<std::array<Point2, 4>> SideWallPolygon(const RoomGeometry& room) {
  std::array<Point2, 4> corners;
  for (int i = 0; i < kNumSideWalls; ++i) {
    if (!(room.side[i].distance > 0.0)) return std::nullopt;
    const auto corner = IntersectLines(room.side[i], room.side[(i + 1) % 4]);
    if (!corner) return std::nullopt;
    corners[i] = *corner;
  }
  // Each corner must lie strictly inside the two walls it does not touch,
  // otherwise some wall is cut away or the region is unbounded.
  for (int i = 0; i < kNumSideWalls; ++i) {
    const Point3 p(corners[i].x(), corners[i].y(), 0.0);
    if (!(room.side[(i + 2) % 4].SignedDistance(p) > 0.0)) return std::nullopt;
    if (!(room.side[(i + 3) % 4].SignedDistance(p) > 0.0)) return std::nullopt;
  }
  double area2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point2& a = corners[i];
    const Point2& b = corners[(i + 1) % 4];
    area2 += a.x() * b.y() - a.y() * b.x();
  }
  if (!(area2 > 0.0)) return std::nullopt;
  return corners;
}

const Point2& LabelVector::side(WallId id) const {
  switch (id) {
    case WallId::kBack:
      return back;
    case WallId::kRight:
      return right;
    case WallId::kFront:
      return front;
    case WallId::kLeft:
      return left;
    default:
      throw Error(ErrorCode::kInvalidArgument, "not a side wall", id);
  }
}

Point2& LabelVector::side(WallId id) {
  return const_cast<Point2&>(std::as_const(*this).side(id));
}

std::array<double, LabelVector::kSize> LabelVector::ToArray() const {
  return {mic.x(),  mic.y(),  back.x(), back.y(), right.x(), right.y(),
          front.x(), front.y(), left.x(), left.y(), floor_z,   ceiling_z};
}

LabelVector LabelVector::FromArray(const std::array<double, kSize>& v) {
  LabelVector l;
  l.mic = {v[0], v[1]};
  l.back = {v[2], v[3]};
  l.right = {v[4], v[5]};
  l.front = {v[6], v[7]};
  l.left = {v[8], v[9]};
  l.floor_z = v[10];
  l.ceiling_z = v[11];
  return l;
}

DistanceRange RoomConstraints::SimulationCeilingRange() const {
  DistanceRange r = range(WallId::kCeiling);
  r.min = std::max(r.min, 0.5 * min_height);
  return r;
}

void RoomConstraints::Validate() const {
  for (int i = 0; i < kNumWalls; ++i) {
    const auto& r = distance[i];
    if (!(r.min > 0.0 && r.min < r.max)) {
      throw Error(ErrorCode::kInvalidArgument, "invalid distance range", static_cast<WallId>(i));
    }
  }
  if (!(max_deviation_deg >= 0.0 && max_deviation_deg < 45.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max_deviation_deg must be in [0, 45)");
  }
  if (!(mic_clearance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mic_clearance must be positive");
  }
  if (!(absorption_lo > 0.0 && absorption_lo <= absorption_hi && absorption_hi < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "absorption range must satisfy 0 < lo <= hi < 1");
  }
  const DistanceRange ceiling = SimulationCeilingRange();
  if (!(ceiling.min < ceiling.max)) {
    throw Error(ErrorCode::kInvalidArgument, "min_height leaves no admissible ceiling distance");
  }
  if (range(WallId::kFloor).min + ceiling.max < min_height) {
    throw Error(ErrorCode::kInvalidArgument, "min_height unreachable");
  }
}

Wall WallFromImagePair(const Point3& mic, const Point3& image) {
  const Eigen::Vector3d diff = mic - image;
  const double len = diff.norm();
  if (!(len > kDegenerateImageEps)) {
    throw Error(ErrorCode::kDegenerateImage, "image coincides with microphone");
  }
  Wall w;
  w.normal = diff / len;
  w.distance = -0.5 * w.normal.dot(mic + image);
  return w;
}

Point3 ReflectPoint(const Point3& p, const Wall& wall) {
  return p - 2.0 * wall.SignedDistance(p) * wall.normal;
}

std::pair<Point3, Point3> SideWallCandidates(const PolarPoint& pp) {
  const double t = pp.theta_deg * kDegToRad;
  const double x = pp.rho * std::cos(t);
  const double y = pp.rho * std::sin(t);
  return {Point3(x, y, 0.0), Point3(x, -y, 0.0)};
}

double FloorCeilingDistance(double rho, double rho_mic) {
  if (!(rho_mic >= 0.0) || !(rho >= rho_mic)) {
    std::ostringstream msg;
    msg << "image radius " << rho << " below microphone radius " << rho_mic;
    throw Error(ErrorCode::kInvalidRadii, msg.str());
  }
  return std::sqrt(rho * rho - rho_mic * rho_mic) / 2.0;
}

LabelVector LabelsFromRoom(const RoomGeometry& room, const MicPose& mic) {
  const Point3& r = mic.position;
  if (!room.Contains(r)) {
    throw Error(ErrorCode::kMicOutsideRoom, "microphone is not inside the room");
  }
  LabelVector l;
  l.mic = r.head<2>();
  for (int i = 0; i < kNumSideWalls; ++i) {
    l.side(SideId(i)) = ReflectPoint(r, room.side[i]).head<2>();
  }
  l.floor_z = ReflectPoint(r, room.wall(WallId::kFloor)).z();
  l.ceiling_z = ReflectPoint(r, room.wall(WallId::kCeiling)).z();
  return l;
}

RoomGeometry RoomFromLabels(const LabelVector& labels) {
  RoomGeometry room;
  const Point3 mic(labels.mic.x(), labels.mic.y(), 0.0);
  for (int i = 0; i < kNumSideWalls; ++i) {
    const Point2& img = labels.side(SideId(i));
    try {
      room.side[i] = WallFromImagePair(mic, Point3(img.x(), img.y(), 0.0));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(WallName(SideId(i))) + ": " + e.what(), SideId(i));
    }
  }
  if (!(std::abs(labels.floor_z) > kDegenerateImageEps)) {
    throw Error(ErrorCode::kDegenerateImage, "floor: image coincides with microphone",
                WallId::kFloor);
  }
  if (!(std::abs(labels.ceiling_z) > kDegenerateImageEps)) {
    throw Error(ErrorCode::kDegenerateImage, "ceiling: image coincides with microphone",
                WallId::kCeiling);
  }
  room.floor_distance = std::abs(labels.floor_z) / 2.0;
  room.ceiling_distance = std::abs(labels.ceiling_z) / 2.0;
  return room;
}

double DistanceToArray(const Point3& p, double array_half_width) {
  const double dx = std::max(std::abs(p.x()) - array_half_width, 0.0);
  return std::sqrt(dx * dx + p.y() * p.y() + p.z() * p.z());
}

SampledRoom SampleRoom(const RoomConstraints& constraints, std::uint64_t seed) {
  constraints.Validate();
  Rng rng(seed);
  const DistanceRange ceiling = constraints.SimulationCeilingRange();
  const double dev = constraints.max_deviation_deg;

  int attempts = 0;
  while (attempts < kMaxSamplingAttempts) {
    SampledRoom s;
    std::array<double, kNumWalls> d{};
    for (int i = 0; i < kNumWalls; ++i) {
      const DistanceRange& r =
          static_cast<WallId>(i) == WallId::kCeiling ? ceiling : constraints.distance[i];
      d[i] = rng.Uniform(r.min, r.max);
    }
    for (int i = 0; i < kNumSideWalls; ++i) {
      s.room.side[i] = MakeSideWall(SideId(i), d[i], rng.Uniform(-dev, dev));
    }
    s.room.floor_distance = d[4];
    s.room.ceiling_distance = d[5];
    ++attempts;

    const bool tall_enough = s.room.height() >= constraints.min_height;
    const bool nearer_floor = s.room.floor_distance < s.room.ceiling_distance;
    const auto polygon = SideWallPolygon(s.room);
    if (!tall_enough || !nearer_floor || !polygon) continue;

    Point2 lo = (*polygon)[0];
    Point2 hi = (*polygon)[0];
    for (const Point2& c : *polygon) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
    lo.y() = std::max(lo.y(), 0.0);

    const double clearance = constraints.mic_clearance;
    while (attempts < kMaxSamplingAttempts) {
      ++attempts;
      const Point3 p(rng.Uniform(lo.x(), hi.x()), rng.Uniform(lo.y(), hi.y()), 0.0);
      bool ok = p.y() > 0.0 && DistanceToArray(p, constraints.array_half_width) >= clearance;
      for (int i = 0; ok && i < kNumSideWalls; ++i) {
        ok = s.room.side[i].SignedDistance(p) >= clearance;
      }
      if (!ok) continue;
      s.mic.position = p;
      for (double& a : s.absorption) {
        a = rng.Uniform(constraints.absorption_lo, constraints.absorption_hi);
      }
      return s;
    }
  }
  std::ostringstream msg;
  msg << "no admissible room after " << kMaxSamplingAttempts << " draws (seed " << seed << ")";
  throw Error(ErrorCode::kSamplingExhausted, msg.str());
}

bool SatisfiesConstraints(const SampledRoom& s, const RoomConstraints& c, double tol) {
  for (int i = 0; i < kNumWalls; ++i) {
    const WallId id = static_cast<WallId>(i);
    const DistanceRange r = id == WallId::kCeiling ? c.SimulationCeilingRange() : c.range(id);
    if (!r.Contains(s.room.wall(id).distance, tol)) return false;
  }
  for (int i = 0; i < kNumSideWalls; ++i) {
    const Wall& w = s.room.side[i];
    if (std::abs(w.normal.norm() - 1.0) > 1e-12 || w.normal.z() != 0.0) return false;
    if (std::abs(SideWallDeviationDeg(SideId(i), w)) > c.max_deviation_deg + tol) return false;
  }
  if (s.room.height() < c.min_height - tol) return false;
  if (!(s.room.floor_distance < s.room.ceiling_distance)) return false;
  if (!SideWallPolygon(s.room)) return false;

  const Point3& p = s.mic.position;
  if (p.z() != 0.0 || !(p.y() > 0.0)) return false;
  if (DistanceToArray(p, c.array_half_width) < c.mic_clearance - tol) return false;
  for (const Wall& w : s.room.side) {
    if (w.SignedDistance(p) < c.mic_clearance - tol) return false;
  }
  for (double a : s.absorption) {
    if (a < c.absorption_lo || a > c.absorption_hi) return false;
  }
  return true;
}

}  // namespace rgi
