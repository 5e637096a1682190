#pragma once

// Image-method room impulse responses between a uniform linear loudspeaker
// array and a single omnidirectional microphone.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgi/geometry.hpp"

namespace rgi {

struct UlaConfig {
  int count = 13;
  double spacing = 0.06;  // meters

  /// Loudspeaker positions on the x-axis, symmetric about the origin.
  std::vector<Point3> Positions() const;
  double HalfWidth() const { return 0.5 * spacing * (count - 1); }
  void Validate() const;
};

/// Half-width (in samples) of the windowed-sinc fractional-delay kernel.
inline constexpr int kKernelHalfWidth = 40;

struct SimParams {
  double fs = 48000.0;
  double c = 343.0;
  int max_order = 5;
  double lpf_cutoff = 20000.0;
  int duration_samples = 2099 + kKernelHalfWidth;

  void Validate() const;
};

struct ImageSource {
  Point3 position = Point3::Zero();
  double gain = 1.0;
  int order = 0;
  std::vector<WallId> walls;  // reflection sequence, first bounce first
};

using Absorptions = std::array<double, kNumWalls>;

/// Mirror images of `source` up to `max_order` with no wall repeated
/// consecutively. Gains multiply sqrt(1 - absorption) per bounce. When a
/// receiver is given, images whose unfolded path does not hit every wall
/// inside its face are dropped; otherwise every sequence is kept.
std::vector<ImageSource> EnumerateImages(const RoomGeometry& room, const Point3& source,
                                         int max_order, const Absorptions& absorption,
                                         const std::optional<Point3>& receiver = std::nullopt);

/// True when the specular path from `receiver` back to the image's source
/// reflects off every wall of the sequence within the wall's face.
bool IsPathValid(const RoomGeometry& room, const Point3& source, const ImageSource& image,
                 const Point3& receiver);

/// Band-limited unit impulse at fractional delay `delay` (samples), sampled at
/// integer offset n. Zero outside the kernel support.
double FractionalDelayTap(double n, double delay, const SimParams& params);

/// Adds one image's contribution gain / (4 pi dist) into `out`.
void AddImageContribution(const ImageSource& image, const Point3& mic, const SimParams& params,
                          std::span<double> out);

std::vector<double> SynthesizeRir(std::span<const ImageSource> images, const Point3& mic,
                                  const SimParams& params);

struct RirSet {
  std::vector<std::vector<double>> channels;
  double fs = 48000.0;

  int count() const { return static_cast<int>(channels.size()); }
  int length() const { return channels.empty() ? 0 : static_cast<int>(channels.front().size()); }
};

RirSet SimulateRirs(const RoomGeometry& room, const MicPose& mic, const UlaConfig& ula,
                    const Absorptions& absorption, const SimParams& params);

std::vector<double> PositivePart(std::span<const double> rir);

// Binary container: magic, fs, M, N as little-endian int32, then M x N
// little-endian float32, channel-major.
inline constexpr std::uint32_t kRirMagic = 0x31524952;  // "RIR1"

void WriteRirSet(const std::string& path, const RirSet& rirs);
RirSet ReadRirSet(const std::string& path);

}  // namespace rgi
