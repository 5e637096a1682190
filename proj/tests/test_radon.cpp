#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "rgi/radon.hpp"
#include "test_util.hpp"

namespace rgi {
namespace {

using testing::CodeOf;

RirSet SimulatedRirs(std::uint64_t seed, int max_order = 2) {
  const SampledRoom r = SampleRoom(RoomConstraints{}, seed);
  SimParams p;
  p.max_order = max_order;
  return SimulateRirs(r.room, r.mic, UlaConfig{}, r.absorption, p);
}

std::vector<double> SpeakerX(const UlaConfig& ula) {
  std::vector<double> x;
  for (const auto& s : ula.Positions()) x.push_back(s.x());
  return x;
}

TEST(RadonGrid, DefaultTimeCount) {
  EXPECT_EQ(RadonGrid{}.time_count(), 2099);
  EXPECT_DOUBLE_EQ(RadonGrid{}.theta_step(), 1.0);
}

TEST(RadonGrid, HashTracksEveryParameter) {
  const RadonGrid base;
  RadonGrid g = base;
  EXPECT_EQ(g.Hash(), base.Hash());
  EXPECT_EQ(base.Hash().size(), 16u);
  g.fs = 44100.0;
  EXPECT_NE(g.Hash(), base.Hash());
  g = base;
  g.c = 340.0;
  EXPECT_NE(g.Hash(), base.Hash());
  g = base;
  g.rho_max = 10.0;
  EXPECT_NE(g.Hash(), base.Hash());
  g = base;
  g.theta_count = 91;
  EXPECT_NE(g.Hash(), base.Hash());
}

TEST(RadonGrid, ValidateRejectsDegenerateGrids) {
  RadonGrid g;
  g.theta_count = 1;
  EXPECT_EQ(CodeOf([&] { g.Validate(); }), ErrorCode::kInvalidArgument);
  g = RadonGrid{};
  g.rho_max = 0.0;
  EXPECT_EQ(CodeOf([&] { g.Validate(); }), ErrorCode::kInvalidArgument);
}

TEST(SteeringTable, SingleSpeakerAtOriginHasNoDelay) {
  UlaConfig ula;
  ula.count = 1;
  RadonGrid grid;
  grid.rho_max = 1.0;
  grid.theta_count = 19;
  const SteeringTable t(ula, grid);
  for (int n = 0; n < grid.time_count(); ++n) {
    for (int j = 0; j < grid.theta_count; ++j) {
      ASSERT_NEAR(t.distance(n, j, 0), grid.rho(n), 1e-12);
      ASSERT_NEAR(t.delay(n, j, 0), 0.0, 1e-9);
    }
  }
}

TEST(SteeringTable, BroadsideCellOfOuterSpeaker) {
  // fs / c = 140 puts rho = 1 m exactly on n = 140.
  RadonGrid grid;
  grid.fs = 140.0 * 343.0;
  grid.rho_max = 1.5;
  UlaConfig ula;
  const SteeringTable t(ula, grid);
  const double d = std::sqrt(1.0 + 0.36 * 0.36);
  EXPECT_NEAR(t.distance(140, 90, 12), d, 1e-12);
  EXPECT_NEAR(t.distance(140, 90, 12), 1.0628264, 1e-7);
  EXPECT_NEAR(t.delay(140, 90, 12), 140.0 * (1.0 - d), 1e-9);
}

TEST(SteeringTable, CollinearCells) {
  const RadonGrid grid;
  const UlaConfig ula;
  const SteeringTable t(ula, grid);
  const auto x = SpeakerX(ula);
  for (int n : {100, 500, 2000}) {
    for (int m = 0; m < ula.count; ++m) {
      const double rho = grid.rho(n);
      EXPECT_NEAR(t.distance(n, 0, m), rho - x[m], 1e-12);
      EXPECT_NEAR(t.delay(n, 0, m), grid.fs / grid.c * x[m], 1e-9);
    }
  }
}

TEST(InterpolateLinear, InsideAndOutside) {
  const std::vector<double> h{1.0, 3.0, -2.0};
  EXPECT_DOUBLE_EQ(InterpolateLinear(h, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(InterpolateLinear(h, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(InterpolateLinear(h, 1.25), 1.75);
  EXPECT_DOUBLE_EQ(InterpolateLinear(h, -0.5), 0.5);
  EXPECT_DOUBLE_EQ(InterpolateLinear(h, 2.5), -1.0);
  EXPECT_DOUBLE_EQ(InterpolateLinear(h, -3.0), 0.0);
  EXPECT_DOUBLE_EQ(InterpolateLinear(h, 10.0), 0.0);
}

TEST(ComputeRadonMap, UnitImpulseGivesRowOfOnes) {
  UlaConfig ula;
  ula.count = 1;
  RadonGrid grid;
  grid.rho_max = 2.0;
  RirSet rirs;
  rirs.channels.assign(1, std::vector<double>(400, 0.0));
  const int n0 = 150;
  rirs.channels[0][n0] = 1.0;
  const RadonMap map = ComputeRadonMap(rirs, ula, grid);
  for (int n = 0; n < map.time_count; ++n) {
    for (int j = 0; j < grid.theta_count; ++j) {
      ASSERT_NEAR(map.at(n, j), n == n0 ? 1.0 : 0.0, 1e-12) << n << " " << j;
    }
  }
}

TEST(ComputeRadonMap, MatchesNaiveOracleOnSubGrid) {
  RadonGrid grid;
  grid.rho_max = 4.0;
  grid.theta_count = 37;
  const UlaConfig ula;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const RirSet rirs = SimulatedRirs(seed);
    const RadonMap map = ComputeRadonMap(rirs, ula, grid);
    const auto expected =
        oracle::NaiveRadon(rirs, SpeakerX(ula), grid.fs, grid.c, grid.time_count(), grid.theta_count);
    ASSERT_EQ(map.values.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      ASSERT_NEAR(map.values[i], expected[i], 1e-9) << "seed " << seed << " cell " << i;
    }
  }
}

TEST(ComputeRadonMap, NormalizedToUnitMaximum) {
  RadonGrid grid;
  grid.rho_max = 5.0;
  const RadonMap map = ComputeRadonMap(SimulatedRirs(4), UlaConfig{}, grid);
  EXPECT_DOUBLE_EQ(map.MaxValue(), 1.0);
  for (double v : map.values) EXPECT_GE(v, 0.0);
}

TEST(ComputeRadonMap, ZeroInputStaysZero) {
  RirSet rirs;
  rirs.channels.assign(13, std::vector<double>(300, 0.0));
  RadonGrid grid;
  grid.rho_max = 1.0;
  const RadonMap map = ComputeRadonMap(rirs, UlaConfig{}, grid);
  for (double v : map.values) ASSERT_EQ(v, 0.0);
}

TEST(ComputeRadonMap, InvariantToPositiveScalingAndNegativeSamples) {
  RadonGrid grid;
  grid.rho_max = 3.0;
  const RirSet rirs = SimulatedRirs(5);
  RirSet scaled = rirs;
  RirSet clipped = rirs;
  for (auto& ch : scaled.channels) {
    for (double& v : ch) v *= 3.5;
  }
  for (auto& ch : clipped.channels) ch = PositivePart(ch);
  const RadonMap a = ComputeRadonMap(rirs, UlaConfig{}, grid);
  const RadonMap b = ComputeRadonMap(scaled, UlaConfig{}, grid);
  const RadonMap c = ComputeRadonMap(clipped, UlaConfig{}, grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    ASSERT_NEAR(a.values[i], b.values[i], 1e-12);
    ASSERT_EQ(a.values[i], c.values[i]);
  }
}

TEST(ComputeRadonMap, MirroredRoomMirrorsAngles) {
  RadonGrid grid;
  grid.rho_max = 6.0;
  const SampledRoom r = SampleRoom(RoomConstraints{}, 9);
  const SampledRoom m = oracle::MirrorX(r);
  SimParams p;
  p.max_order = 2;
  const UlaConfig ula;
  const RadonMap a =
      ComputeRadonMap(SimulateRirs(r.room, r.mic, ula, r.absorption, p), ula, grid);
  const RadonMap b =
      ComputeRadonMap(SimulateRirs(m.room, m.mic, ula, m.absorption, p), ula, grid);
  const int last = grid.theta_count - 1;
  for (int n = 0; n < a.time_count; ++n) {
    for (int j = 0; j <= last; ++j) ASSERT_NEAR(a.at(n, j), b.at(n, last - j), 1e-9);
  }
}

TEST(ComputeRadonMap, GridMismatch) {
  RirSet rirs = SimulatedRirs(6, 0);
  RadonGrid grid;
  grid.rho_max = 1.0;
  grid.fs = 44100.0;
  EXPECT_EQ(CodeOf([&] { ComputeRadonMap(rirs, UlaConfig{}, grid); }), ErrorCode::kGridMismatch);
  grid.fs = 48000.0;
  rirs.channels.pop_back();
  EXPECT_EQ(CodeOf([&] { ComputeRadonMap(rirs, UlaConfig{}, grid); }), ErrorCode::kGridMismatch);
}

RadonMap SmallMap() {
  RadonGrid grid;
  grid.rho_max = 2.0;
  grid.theta_count = 19;
  return ComputeRadonMap(SimulatedRirs(7), UlaConfig{}, grid);
}

TEST(RadonMapIo, BinaryRoundTripIsFloatExact) {
  testing::TempDir dir;
  const RadonMap map = SmallMap();
  WriteRadonMap(dir.File("m.rtm"), map);
  const RadonMap back = ReadRadonMap(dir.File("m.rtm"));
  EXPECT_EQ(back.time_count, map.time_count);
  EXPECT_EQ(back.grid.theta_count, map.grid.theta_count);
  EXPECT_EQ(back.grid.fs, map.grid.fs);
  EXPECT_EQ(back.grid.c, map.grid.c);
  EXPECT_EQ(back.grid.rho_max, map.grid.rho_max);
  ASSERT_EQ(back.values.size(), map.values.size());
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    ASSERT_EQ(back.values[i], static_cast<double>(static_cast<float>(map.values[i])));
  }
  const auto bytes = EncodeRadonMap(map);
  EXPECT_EQ(bytes.size(), kRadonHeaderBytes + 4 * map.values.size());
}

TEST(RadonMapIo, TruncatedAndForeignBytesAreCorrupt) {
  const auto bytes = EncodeRadonMap(SmallMap());
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 4);
  EXPECT_EQ(CodeOf([&] { DecodeRadonMap(cut); }), ErrorCode::kCorruptRecord);
  std::vector<std::uint8_t> bad = bytes;
  bad[0] ^= 0xff;
  EXPECT_EQ(CodeOf([&] { DecodeRadonMap(bad); }), ErrorCode::kCorruptRecord);
  bad = bytes;
  bad[4] = 9;
  EXPECT_EQ(CodeOf([&] { DecodeRadonMap(bad); }), ErrorCode::kCorruptRecord);
}

TEST(RadonMapIo, PgmLayout) {
  testing::TempDir dir;
  const RadonMap map = SmallMap();
  WriteRadonPgm(dir.File("m.pgm"), map);
  std::ifstream f(dir.File("m.pgm"), std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  f >> magic >> w >> h >> maxval;
  f.get();
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, map.grid.theta_count);
  EXPECT_EQ(h, map.time_count);
  EXPECT_EQ(maxval, 65535);
  std::vector<unsigned char> px((std::istreambuf_iterator<char>(f)), {});
  ASSERT_EQ(px.size(), 2 * map.values.size());
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const int level = px[2 * i] << 8 | px[2 * i + 1];
    ASSERT_NEAR(level / 65535.0, map.values[i], 1.0 / 65535.0);
  }
}

TEST(RadonMapIo, CsvLayout) {
  testing::TempDir dir;
  const RadonMap map = SmallMap();
  WriteRadonCsv(dir.File("m.csv"), map);
  std::ifstream f(dir.File("m.csv"));
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line.rfind("n,rho,theta_0,theta_10,", 0), 0u);
  int rows = 0;
  while (std::getline(f, line)) {
    std::stringstream s(line);
    std::string cell;
    int cols = 0;
    double last = 0.0;
    while (std::getline(s, cell, ',')) {
      last = std::stod(cell);
      ++cols;
    }
    ASSERT_EQ(cols, 2 + map.grid.theta_count);
    EXPECT_NEAR(last, map.at(rows, map.grid.theta_count - 1), 1e-8);
    ++rows;
  }
  EXPECT_EQ(rows, map.time_count);
}

}  // namespace
}  // namespace rgi
