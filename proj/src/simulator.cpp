#include "rgi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rgi/io.hpp"

namespace rgi {

namespace {

constexpr double kFaceTolerance = 1e-9;

double ReflectionCoefficient(double absorption) { return std::sqrt(1.0 - absorption); }

void Enumerate(const RoomGeometry& room, const Absorptions& absorption, int max_order,
               ImageSource parent, std::vector<ImageSource>& out) {
  if (parent.order == max_order) return;
  for (int w = 0; w < kNumWalls; ++w) {
    const WallId id = static_cast<WallId>(w);
    if (!parent.walls.empty() && parent.walls.back() == id) continue;
    ImageSource child;
    child.position = ReflectPoint(parent.position, room.wall(id));
    child.gain = parent.gain * ReflectionCoefficient(absorption[w]);
    child.order = parent.order + 1;
    child.walls = parent.walls;
    child.walls.push_back(id);
    out.push_back(child);
    Enumerate(room, absorption, max_order, std::move(child), out);
  }
}

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

std::vector<Point3> UlaConfig::Positions() const {
  std::vector<Point3> p;
  p.reserve(count);
  const double center = 0.5 * (count - 1);
  for (int m = 0; m < count; ++m) p.emplace_back((m - center) * spacing, 0.0, 0.0);
  return p;
}

void UlaConfig::Validate() const {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "array needs at least one loudspeaker");
  if (!(spacing > 0.0)) throw Error(ErrorCode::kInvalidArgument, "array spacing must be positive");
}

void SimParams::Validate() const {
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "speed of sound must be positive");
  if (!(lpf_cutoff > 0.0 && fs > 2.0 * lpf_cutoff)) {
    throw Error(ErrorCode::kInvalidArgument, "low-pass cutoff must be below fs / 2");
  }
  if (max_order < 0) throw Error(ErrorCode::kInvalidArgument, "max_order must be >= 0");
  if (duration_samples < 1) throw Error(ErrorCode::kInvalidArgument, "duration must be >= 1");
}

std::vector<ImageSource> EnumerateImages(const RoomGeometry& room, const Point3& source,
                                         int max_order, const Absorptions& absorption,
                                         const std::optional<Point3>& receiver) {
  if (!room.Contains(source)) {
    throw Error(ErrorCode::kSourceOutsideRoom, "source is not inside the room");
  }
  if (max_order < 0) throw Error(ErrorCode::kInvalidArgument, "max_order must be >= 0");

  std::vector<ImageSource> all;
  ImageSource direct;
  direct.position = source;
  all.push_back(direct);
  Enumerate(room, absorption, max_order, direct, all);
  if (!receiver) return all;

  std::vector<ImageSource> valid;
  valid.reserve(all.size());
  for (auto& img : all) {
    if (IsPathValid(room, source, img, *receiver)) valid.push_back(std::move(img));
  }
  return valid;
}

bool IsPathValid(const RoomGeometry& room, const Point3& source, const ImageSource& image,
                 const Point3& receiver) {
  const int k = static_cast<int>(image.walls.size());
  if (k == 0) return true;

  std::vector<Point3> chain(k + 1);
  chain[0] = source;
  for (int j = 0; j < k; ++j) chain[j + 1] = ReflectPoint(chain[j], room.wall(image.walls[j]));

  // Walk back from the receiver: the segment towards image j must cross
  // wall j, and the crossing must lie on that wall's face.
  Point3 from = receiver;
  for (int j = k; j >= 1; --j) {
    const WallId id = image.walls[j - 1];
    const Wall wall = room.wall(id);
    const double a = wall.SignedDistance(from);
    const double b = wall.SignedDistance(chain[j]);
    if (!(a > kFaceTolerance) || !(b < -kFaceTolerance)) return false;
    const Point3 hit = from + (a / (a - b)) * (chain[j] - from);
    for (int w = 0; w < kNumWalls; ++w) {
      if (static_cast<WallId>(w) == id) continue;
      if (room.wall(static_cast<WallId>(w)).SignedDistance(hit) < -kFaceTolerance) return false;
    }
    from = hit;
  }
  return true;
}

double FractionalDelayTap(double n, double delay, const SimParams& params) {
  const double t = n - delay;
  const double support = kKernelHalfWidth + 0.5;
  if (std::abs(t) >= support) return 0.0;
  const double bw = 2.0 * params.lpf_cutoff / params.fs;
  const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * t / support));
  return bw * Sinc(bw * t) * window;
}

void AddImageContribution(const ImageSource& image, const Point3& mic, const SimParams& params,
                          std::span<double> out) {
  const double dist = (image.position - mic).norm();
  if (!(dist > 0.0)) return;
  const double delay = params.fs * dist / params.c;
  const double amp = image.gain / (4.0 * std::numbers::pi * dist);
  const double support = kKernelHalfWidth + 0.5;
  const long first = std::max<long>(0, static_cast<long>(std::floor(delay - support)) + 1);
  const long last =
      std::min<long>(static_cast<long>(out.size()) - 1, static_cast<long>(std::ceil(delay + support)) - 1);
  for (long n = first; n <= last; ++n) {
    out[n] += amp * FractionalDelayTap(static_cast<double>(n), delay, params);
  }
}

std::vector<double> SynthesizeRir(std::span<const ImageSource> images, const Point3& mic,
                                  const SimParams& params) {
  params.Validate();
  if (images.empty()) throw Error(ErrorCode::kInvalidArgument, "no image sources");
  std::vector<double> out(params.duration_samples, 0.0);
  for (const ImageSource& img : images) AddImageContribution(img, mic, params, out);
  return out;
}

RirSet SimulateRirs(const RoomGeometry& room, const MicPose& mic, const UlaConfig& ula,
                    const Absorptions& absorption, const SimParams& params) {
  ula.Validate();
  params.Validate();
  if (!room.Contains(mic.position)) {
    throw Error(ErrorCode::kMicOutsideRoom, "microphone is not inside the room");
  }
  RirSet set;
  set.fs = params.fs;
  for (const Point3& s : ula.Positions()) {
    const auto images = EnumerateImages(room, s, params.max_order, absorption, mic.position);
    set.channels.push_back(SynthesizeRir(images, mic.position, params));
  }
  return set;
}

std::vector<double> PositivePart(std::span<const double> rir) {
  std::vector<double> out(rir.size());
  std::transform(rir.begin(), rir.end(), out.begin(), [](double v) { return std::max(v, 0.0); });
  return out;
}

void WriteRirSet(const std::string& path, const RirSet& rirs) {
  const int m = rirs.count();
  const int n = rirs.length();
  io::Bytes out;
  out.reserve(16 + 4ull * m * n);
  io::PutU32(out, kRirMagic);
  io::PutI32(out, static_cast<std::int32_t>(std::lround(rirs.fs)));
  io::PutI32(out, m);
  io::PutI32(out, n);
  for (const auto& ch : rirs.channels) {
    if (static_cast<int>(ch.size()) != n) {
      throw Error(ErrorCode::kInvalidArgument, "RIR channels differ in length");
    }
    for (double v : ch) io::PutF32(out, static_cast<float>(v));
  }
  io::WriteFileAtomic(path, out);
}

RirSet ReadRirSet(const std::string& path) {
  const io::Bytes in = io::ReadFile(path);
  if (in.size() < 16 || io::GetU32(in, 0) != kRirMagic) {
    throw Error(ErrorCode::kCorruptRecord, path + ": not an RIR container");
  }
  const std::int32_t fs = io::GetI32(in, 4);
  const std::int32_t m = io::GetI32(in, 8);
  const std::int32_t n = io::GetI32(in, 12);
  if (fs <= 0 || m < 0 || n < 0 || in.size() != 16 + 4ull * m * n) {
    throw Error(ErrorCode::kCorruptRecord, path + ": inconsistent RIR header");
  }
  RirSet set;
  set.fs = fs;
  set.channels.assign(m, std::vector<double>(n));
  std::size_t off = 16;
  for (auto& ch : set.channels) {
    for (double& v : ch) {
      v = io::GetF32(in, off);
      off += 4;
    }
  }
  return set;
}

}  // namespace rgi
