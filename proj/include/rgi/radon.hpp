#pragma once

// Time-domain Radon transform map: a full-band delay-and-sum beamformer
// steered over a polar (rho_n, theta) grid in the array plane, applied to
// the positive parts of the RIR channels.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rgi/io.hpp"
#include "rgi/simulator.hpp"

namespace rgi {

struct RadonGrid {
  double fs = 48000.0;
  double c = 343.0;
  double rho_max = 15.0;
  int theta_count = 181;  // uniformly covers [0, 180] degrees inclusive

  /// round(fs * rho_max / c).
  int time_count() const;
  double theta_step() const { return theta_count > 1 ? 180.0 / (theta_count - 1) : 0.0; }
  double rho(int n) const { return n * c / fs; }
  double theta_deg(int j) const { return j * theta_step(); }
  void Validate() const;

  /// FNV-1a over the grid parameters, hex encoded.
  std::string Hash() const;
};

/// Per-(n, theta, m) path distance and delay, stored [n][theta][m].
class SteeringTable {
 public:
  SteeringTable(const UlaConfig& ula, const RadonGrid& grid);

  const RadonGrid& grid() const { return grid_; }
  int channels() const { return channels_; }

  double distance(int n, int j, int m) const { return distance_[Index(n, j, m)]; }
  double delay(int n, int j, int m) const { return delay_[Index(n, j, m)]; }

 private:
  std::size_t Index(int n, int j, int m) const {
    return (static_cast<std::size_t>(n) * grid_.theta_count + j) * channels_ + m;
  }

  RadonGrid grid_;
  int channels_;
  std::vector<double> distance_;
  std::vector<double> delay_;
};

struct RadonMap {
  RadonGrid grid;
  int time_count = 0;
  std::vector<double> values;  // time-major: values[n * theta_count + j]

  double at(int n, int j) const { return values[static_cast<std::size_t>(n) * grid.theta_count + j]; }
  double& at(int n, int j) { return values[static_cast<std::size_t>(n) * grid.theta_count + j]; }
  double MaxValue() const;
};

/// Linear interpolation of `h` at fractional index t; reads outside the
/// sequence are zero.
double InterpolateLinear(std::span<const double> h, double t);

RadonMap ComputeRadonMap(const RirSet& rirs, const SteeringTable& steering);
RadonMap ComputeRadonMap(const RirSet& rirs, const UlaConfig& ula, const RadonGrid& grid);

/// Scales by the maximum value in place; an all-zero map is left untouched.
void NormalizeByMax(RadonMap& map);

// Map binary format: 8 x 32-bit little-endian header fields
//   magic, version, N, theta_count (uint32), fs, c, rho_max (float32), reserved
// followed by N x theta_count float32 values, time-major.
inline constexpr std::uint32_t kRadonMagic = 0x314d5452;  // "RTM1"
inline constexpr std::uint32_t kRadonVersion = 1;
inline constexpr std::size_t kRadonHeaderBytes = 32;

io::Bytes EncodeRadonMap(const RadonMap& map);
RadonMap DecodeRadonMap(std::span<const std::uint8_t> bytes);

void WriteRadonMap(const std::string& path, const RadonMap& map);
RadonMap ReadRadonMap(const std::string& path);

/// Binary PGM (P5, maxval 65535): one row per time sample, one column per angle.
void WriteRadonPgm(const std::string& path, const RadonMap& map);
void WriteRadonCsv(const std::string& path, const RadonMap& map);

}  // namespace rgi
