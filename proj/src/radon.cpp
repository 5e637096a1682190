#include "rgi/radon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace rgi {

int RadonGrid::time_count() const { return static_cast<int>(std::lround(fs * rho_max / c)); }

void RadonGrid::Validate() const {
  if (!(fs > 0.0) || !(c > 0.0) || !(rho_max > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid fs, c and rho_max must be positive");
  }
  if (time_count() < 1) throw Error(ErrorCode::kInvalidArgument, "grid has no time samples");
  if (theta_count < 2) throw Error(ErrorCode::kInvalidArgument, "grid needs at least two angles");
}

std::string RadonGrid::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  mix(std::bit_cast<std::uint64_t>(fs));
  mix(std::bit_cast<std::uint64_t>(c));
  mix(std::bit_cast<std::uint64_t>(rho_max));
  mix(static_cast<std::uint64_t>(theta_count));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SteeringTable::SteeringTable(const UlaConfig& ula, const RadonGrid& grid)
    : grid_(grid), channels_(ula.count) {
  ula.Validate();
  grid.Validate();
  const int n_count = grid.time_count();
  const int t_count = grid.theta_count;
  const auto speakers = ula.Positions();
  const double scale = grid.fs / grid.c;
  distance_.resize(static_cast<std::size_t>(n_count) * t_count * channels_);
  delay_.resize(distance_.size());

  for (int j = 0; j < t_count; ++j) {
    const double theta = grid.theta_deg(j) * std::numbers::pi / 180.0;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    for (int n = 0; n < n_count; ++n) {
      const double rho = grid.rho(n);
      const double px = rho * ct;
      const double py = rho * st;
      for (int m = 0; m < channels_; ++m) {
        const double dx = px - speakers[m].x();
        const double d = std::sqrt(dx * dx + py * py);
        distance_[Index(n, j, m)] = d;
        delay_[Index(n, j, m)] = scale * (rho - d);
      }
    }
  }
}

double RadonMap::MaxValue() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double InterpolateLinear(std::span<const double> h, double t) {
  const double base = std::floor(t);
  const double frac = t - base;
  const long i0 = static_cast<long>(base);
  const long len = static_cast<long>(h.size());
  const double v0 = (i0 >= 0 && i0 < len) ? h[i0] : 0.0;
  const double v1 = (i0 + 1 >= 0 && i0 + 1 < len) ? h[i0 + 1] : 0.0;
  return (1.0 - frac) * v0 + frac * v1;
}

void NormalizeByMax(RadonMap& map) {
  const double peak = map.MaxValue();
  if (!(peak > 0.0)) return;
  for (double& v : map.values) v /= peak;
}

RadonMap ComputeRadonMap(const RirSet& rirs, const SteeringTable& steering) {
  const RadonGrid& grid = steering.grid();
  if (rirs.fs != grid.fs) {
    std::ostringstream msg;
    msg << "RIR fs " << rirs.fs << " does not match grid fs " << grid.fs;
    throw Error(ErrorCode::kGridMismatch, msg.str());
  }
  if (rirs.count() != steering.channels()) {
    throw Error(ErrorCode::kGridMismatch, "RIR channel count does not match the array");
  }

  std::vector<std::vector<double>> positive;
  positive.reserve(rirs.count());
  for (const auto& ch : rirs.channels) positive.push_back(PositivePart(ch));

  RadonMap map;
  map.grid = grid;
  map.time_count = grid.time_count();
  map.values.assign(static_cast<std::size_t>(map.time_count) * grid.theta_count, 0.0);

  const int m_count = steering.channels();
  for (int n = 0; n < map.time_count; ++n) {
    for (int j = 0; j < grid.theta_count; ++j) {
      double acc = 0.0;
      for (int m = 0; m < m_count; ++m) {
        acc += steering.distance(n, j, m) *
               InterpolateLinear(positive[m], n - steering.delay(n, j, m));
      }
      map.at(n, j) = acc;
    }
  }
  NormalizeByMax(map);
  return map;
}

RadonMap ComputeRadonMap(const RirSet& rirs, const UlaConfig& ula, const RadonGrid& grid) {
  return ComputeRadonMap(rirs, SteeringTable(ula, grid));
}

io::Bytes EncodeRadonMap(const RadonMap& map) {
  io::Bytes out;
  out.reserve(kRadonHeaderBytes + 4 * map.values.size());
  io::PutU32(out, kRadonMagic);
  io::PutU32(out, kRadonVersion);
  io::PutU32(out, static_cast<std::uint32_t>(map.time_count));
  io::PutU32(out, static_cast<std::uint32_t>(map.grid.theta_count));
  io::PutF32(out, static_cast<float>(map.grid.fs));
  io::PutF32(out, static_cast<float>(map.grid.c));
  io::PutF32(out, static_cast<float>(map.grid.rho_max));
  io::PutU32(out, 0);
  for (double v : map.values) io::PutF32(out, static_cast<float>(v));
  return out;
}

RadonMap DecodeRadonMap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kRadonHeaderBytes || io::GetU32(bytes, 0) != kRadonMagic) {
    throw Error(ErrorCode::kCorruptRecord, "not a Radon map");
  }
  if (io::GetU32(bytes, 4) != kRadonVersion) {
    throw Error(ErrorCode::kCorruptRecord, "unsupported Radon map version");
  }
  RadonMap map;
  map.time_count = static_cast<int>(io::GetU32(bytes, 8));
  map.grid.theta_count = static_cast<int>(io::GetU32(bytes, 12));
  map.grid.fs = io::GetF32(bytes, 16);
  map.grid.c = io::GetF32(bytes, 20);
  map.grid.rho_max = io::GetF32(bytes, 24);
  const std::size_t count = static_cast<std::size_t>(map.time_count) * map.grid.theta_count;
  if (map.time_count < 0 || map.grid.theta_count < 0 ||
      bytes.size() != kRadonHeaderBytes + 4 * count) {
    throw Error(ErrorCode::kCorruptRecord, "Radon map payload size mismatch");
  }
  map.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) map.values[i] = io::GetF32(bytes, kRadonHeaderBytes + 4 * i);
  return map;
}

void WriteRadonMap(const std::string& path, const RadonMap& map) {
  io::WriteFileAtomic(path, EncodeRadonMap(map));
}

RadonMap ReadRadonMap(const std::string& path) { return DecodeRadonMap(io::ReadFile(path)); }

void WriteRadonPgm(const std::string& path, const RadonMap& map) {
  const std::string header = "P5\n" + std::to_string(map.grid.theta_count) + " " +
                             std::to_string(map.time_count) + "\n65535\n";
  io::Bytes out(header.begin(), header.end());
  out.reserve(out.size() + 2 * map.values.size());
  for (double v : map.values) {
    const auto level = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
    out.push_back(static_cast<std::uint8_t>(level >> 8));  // PGM is big-endian
    out.push_back(static_cast<std::uint8_t>(level & 0xff));
  }
  io::WriteFileAtomic(path, out);
}

void WriteRadonCsv(const std::string& path, const RadonMap& map) {
  std::ostringstream s;
  s.precision(9);
  s << "n,rho";
  for (int j = 0; j < map.grid.theta_count; ++j) s << ",theta_" << map.grid.theta_deg(j);
  s << "\n";
  for (int n = 0; n < map.time_count; ++n) {
    s << n << "," << map.grid.rho(n);
    for (int j = 0; j < map.grid.theta_count; ++j) s << "," << map.at(n, j);
    s << "\n";
  }
  io::WriteFileAtomic(path, s.str());
}

}  // namespace rgi
