#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <fstream>
#include <limits>
#include <set>

#include "oracles.hpp"
#include "rgi/simulator.hpp"
#include "test_util.hpp"

namespace rgi {
namespace {

using testing::CodeOf;

constexpr Absorptions kNoAbsorption{};

RoomGeometry ExampleShoebox() { return MakeShoebox(0.5, 2.0, 3.5, 2.0, 1.0, 1.5); }

std::size_t ArgMax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double Energy(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

TEST(EnumerateImages, OrderZeroIsTheSource) {
  const auto images = EnumerateImages(ExampleShoebox(), {0.1, 0.2, 0.3}, 0, kNoAbsorption);
  ASSERT_EQ(images.size(), 1u);
  EXPECT_EQ(images[0].order, 0);
  EXPECT_DOUBLE_EQ(images[0].gain, 1.0);
  EXPECT_TRUE(images[0].position.isApprox(Point3(0.1, 0.2, 0.3)));
}

TEST(EnumerateImages, FirstOrderShoeboxImages) {
  const Point3 s(0.3, 1.0, 0.0);
  const auto images = EnumerateImages(ExampleShoebox(), s, 1, kNoAbsorption);
  ASSERT_EQ(images.size(), 7u);
  std::set<std::array<double, 3>> got;
  for (const auto& img : images) {
    if (img.order == 1) got.insert({img.position.x(), img.position.y(), img.position.z()});
  }
  const std::set<std::array<double, 3>> expected{
      {0.3, -2.0, 0.0}, {3.7, 1.0, 0.0}, {0.3, 6.0, 0.0},
      {-4.3, 1.0, 0.0}, {0.3, 1.0, -2.0}, {0.3, 1.0, 3.0}};
  ASSERT_EQ(got.size(), expected.size());
  auto e = expected.begin();
  for (const auto& g : got) {
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(g[k], (*e)[k], 1e-12);
    ++e;
  }
}

TEST(EnumerateImages, UnprunedCountMatchesSequenceCount) {
  for (int order = 0; order <= 4; ++order) {
    const auto images = EnumerateImages(ExampleShoebox(), {0.0, 1.0, 0.0}, order, kNoAbsorption);
    EXPECT_EQ(images.size(), oracle::CountSequences(kNumWalls, order)) << "order " << order;
  }
}

TEST(EnumerateImages, PositionsMatchExplicitMirrorChain) {
  const SampledRoom r = SampleRoom(RoomConstraints{}, 17);
  const Point3 s(0.12, 0.0, 0.0);
  for (const auto& img : EnumerateImages(r.room, s, 3, r.absorption)) {
    oracle::Vec3 p = oracle::ToVec(s);
    double gain = 1.0;
    for (WallId w : img.walls) {
      const Wall wall = r.room.wall(w);
      p = oracle::Mirror(p, oracle::ToVec(wall.normal), wall.distance);
      gain *= std::sqrt(1.0 - r.absorption[static_cast<int>(w)]);
    }
    EXPECT_EQ(img.order, static_cast<int>(img.walls.size()));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(img.position[k], p[k], 1e-12);
    EXPECT_NEAR(img.gain, gain, 1e-15);
  }
}

TEST(EnumerateImages, ShoeboxPruningKeepsOneImagePerLatticePosition) {
  // In a shoebox each distinct image position corresponds to exactly one
  // valid path, so pruning must leave the distinct positions of the full set.
  const RoomGeometry room = ExampleShoebox();
  const Point3 s(0.18, 0.0, 0.0);
  const Point3 mic(-0.4, 1.7, 0.0);
  for (int order = 1; order <= 3; ++order) {
    const auto all = EnumerateImages(room, s, order, kNoAbsorption);
    const auto valid = EnumerateImages(room, s, order, kNoAbsorption, mic);
    auto key = [](const Point3& p) {
      return std::array<long long, 3>{std::llround(p.x() * 1e6), std::llround(p.y() * 1e6),
                                      std::llround(p.z() * 1e6)};
    };
    std::set<std::array<long long, 3>> distinct;
    for (const auto& img : all) distinct.insert(key(img.position));
    std::set<std::array<long long, 3>> kept;
    for (const auto& img : valid) kept.insert(key(img.position));
    EXPECT_EQ(valid.size(), distinct.size()) << "order " << order;
    EXPECT_EQ(kept, distinct) << "order " << order;
  }
  EXPECT_EQ(EnumerateImages(room, s, 2, kNoAbsorption, mic).size(), 25u);
}

TEST(EnumerateImages, PrunedCountBoundedBySequenceCount) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SampledRoom r = SampleRoom(RoomConstraints{}, seed);
    const auto valid = EnumerateImages(r.room, {0.0, 0.0, 0.0}, 3, r.absorption, r.mic.position);
    EXPECT_LE(valid.size(), oracle::CountSequences(kNumWalls, 3));
    auto count = [&](int k) {
      return std::count_if(valid.begin(), valid.end(),
                           [&](const ImageSource& i) { return i.order == k; });
    };
    EXPECT_EQ(count(0), 1);
    EXPECT_LE(count(1), kNumWalls);
    // Floor and ceiling faces span the whole room footprint.
    for (WallId w : {WallId::kFloor, WallId::kCeiling}) {
      EXPECT_TRUE(std::any_of(valid.begin(), valid.end(), [&](const ImageSource& i) {
        return i.order == 1 && i.walls[0] == w;
      }));
    }
  }
}

TEST(EnumerateImages, SourceOutsideRoom) {
  EXPECT_EQ(CodeOf([] { EnumerateImages(ExampleShoebox(), {5.0, 1.0, 0.0}, 1, kNoAbsorption); }),
            ErrorCode::kSourceOutsideRoom);
}

TEST(SynthesizeRir, DirectPathAtOneMeterPeaksAtSample140) {
  SimParams p;
  ImageSource img;
  img.position = {0.0, 0.0, 0.0};
  const auto rir = SynthesizeRir(std::span(&img, 1), {0.0, 1.0, 0.0}, p);
  ASSERT_EQ(static_cast<int>(rir.size()), p.duration_samples);
  EXPECT_EQ(ArgMax(rir), 140u);  // 48000 / 343 = 139.94
}

TEST(SynthesizeRir, AmplitudeFollowsGainOverDistance) {
  SimParams p;
  // Distances on whole samples so both peaks land on a tap.
  const double d1 = 140.0 * p.c / p.fs;
  const double d2 = 420.0 * p.c / p.fs;
  std::vector<ImageSource> imgs(2);
  imgs[0].position = {0.0, d1, 0.0};
  imgs[1].position = {0.0, d2, 0.0};
  imgs[1].gain = 0.5;
  const Point3 mic(0.0, 0.0, 0.0);
  const auto rir = SynthesizeRir(imgs, mic, p);
  const double a1 = *std::max_element(rir.begin(), rir.begin() + 300);
  const double a2 = *std::max_element(rir.begin() + 300, rir.end());
  const double expected = (1.0 / d1) / (0.5 / d2);
  EXPECT_NEAR(a1 / a2, expected, 0.02 * expected);
}

TEST(SynthesizeRir, SumOfIndividualContributions) {
  const SampledRoom r = SampleRoom(RoomConstraints{}, 3);
  SimParams p;
  const auto imgs = EnumerateImages(r.room, {0.06, 0, 0}, 2, r.absorption, r.mic.position);
  const auto full = SynthesizeRir(imgs, r.mic.position, p);
  std::vector<double> sum(p.duration_samples, 0.0);
  for (const auto& img : imgs) {
    std::vector<double> one(p.duration_samples, 0.0);
    AddImageContribution(img, r.mic.position, p, one);
    for (std::size_t n = 0; n < sum.size(); ++n) sum[n] += one[n];
  }
  for (std::size_t n = 0; n < sum.size(); ++n) EXPECT_NEAR(full[n], sum[n], 1e-12);
}

TEST(SynthesizeRir, KernelIsBandLimitedAndFinite) {
  SimParams p;
  const double bw = 2.0 * p.lpf_cutoff / p.fs;
  EXPECT_NEAR(FractionalDelayTap(100.0, 100.0, p), bw, 1e-12);
  EXPECT_EQ(FractionalDelayTap(100.0 + kKernelHalfWidth + 1, 100.0, p), 0.0);
  EXPECT_EQ(FractionalDelayTap(100.0 - kKernelHalfWidth - 1, 100.0, p), 0.0);
  // Tap sum approximates the DC gain of the low-pass filter.
  double sum = 0.0;
  for (int n = 0; n < 400; ++n) sum += FractionalDelayTap(n, 200.37, p);
  EXPECT_NEAR(sum, 1.0, 0.02);
}

TEST(SynthesizeRir, RejectsEmptyImageList) {
  EXPECT_EQ(CodeOf([] { SynthesizeRir({}, Point3::Zero(), SimParams{}); }),
            ErrorCode::kInvalidArgument);
}

TEST(SimulateRirs, ShapeAndMicOutsideRoom) {
  const SampledRoom r = SampleRoom(RoomConstraints{}, 11);
  SimParams p;
  p.max_order = 2;
  const RirSet set = SimulateRirs(r.room, r.mic, UlaConfig{}, r.absorption, p);
  EXPECT_EQ(set.count(), 13);
  EXPECT_EQ(set.length(), p.duration_samples);
  EXPECT_EQ(set.fs, p.fs);
  MicPose outside;
  outside.position = {0.0, 50.0, 0.0};
  EXPECT_EQ(CodeOf([&] { SimulateRirs(r.room, outside, UlaConfig{}, r.absorption, p); }),
            ErrorCode::kMicOutsideRoom);
}

TEST(SimulateRirs, MirroredRoomSwapsChannels) {
  const SampledRoom r = SampleRoom(RoomConstraints{}, 23);
  const SampledRoom m = oracle::MirrorX(r);

  SimParams p;
  p.max_order = 3;
  const RirSet a = SimulateRirs(r.room, r.mic, UlaConfig{}, r.absorption, p);
  const RirSet b = SimulateRirs(m.room, m.mic, UlaConfig{}, m.absorption, p);
  const int count = a.count();
  for (int ch = 0; ch < count; ++ch) {
    for (int n = 0; n < a.length(); ++n) {
      ASSERT_NEAR(a.channels[ch][n], b.channels[count - 1 - ch][n], 1e-12) << ch << " " << n;
    }
  }
}

TEST(SimulateRirs, ReciprocalSourceAndReceiver) {
  const SampledRoom r = SampleRoom(RoomConstraints{}, 31);
  SimParams p;
  p.max_order = 3;
  const Point3 s(0.18, 0.0, 0.0);
  const auto fwd = EnumerateImages(r.room, s, p.max_order, r.absorption, r.mic.position);
  const auto rev = EnumerateImages(r.room, r.mic.position, p.max_order, r.absorption, s);
  const auto a = SynthesizeRir(fwd, r.mic.position, p);
  const auto b = SynthesizeRir(rev, s, p);
  for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-12);
}

TEST(SimulateRirs, MoreAbsorptionLessEnergy) {
  SimParams p;
  p.max_order = 3;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SampledRoom r = SampleRoom(RoomConstraints{}, seed);
    r.absorption.fill(0.1);
    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      r.absorption.fill(a);
      const RirSet set = SimulateRirs(r.room, r.mic, UlaConfig{}, r.absorption, p);
      const double e = Energy(set.channels[6]);
      EXPECT_LT(e, prev) << "seed " << seed << " absorption " << a;
      prev = e;
    }
  }
}

TEST(SimulateRirs, FirstOrderArrivalsMatchGeometry) {
  const SampledRoom r = SampleRoom(RoomConstraints{}, 41);
  SimParams p;
  p.max_order = 1;
  const UlaConfig ula;
  const RirSet set = SimulateRirs(r.room, r.mic, ula, r.absorption, p);
  const auto speakers = ula.Positions();
  for (int ch = 0; ch < set.count(); ++ch) {
    const auto& h = set.channels[ch];
    const double direct = (r.mic.position - speakers[ch]).norm() * p.fs / p.c;
    EXPECT_NEAR(static_cast<double>(ArgMax(h)), direct, 1.0);
  }
}

TEST(PositivePart, ClampsNegatives) {
  const std::vector<double> in{0.0, -0.3, 0.5, -1.0, 0.2};
  EXPECT_EQ(PositivePart(in), (std::vector<double>{0.0, 0.0, 0.5, 0.0, 0.2}));
  EXPECT_TRUE(PositivePart(std::vector<double>{}).empty());
}

TEST(RirContainer, RoundTripIsFloatExact) {
  testing::TempDir dir;
  const SampledRoom r = SampleRoom(RoomConstraints{}, 2);
  SimParams p;
  p.max_order = 1;
  const RirSet set = SimulateRirs(r.room, r.mic, UlaConfig{}, r.absorption, p);
  WriteRirSet(dir.File("a.rir"), set);
  const RirSet back = ReadRirSet(dir.File("a.rir"));
  ASSERT_EQ(back.count(), set.count());
  ASSERT_EQ(back.length(), set.length());
  EXPECT_EQ(back.fs, set.fs);
  for (int ch = 0; ch < set.count(); ++ch) {
    for (int n = 0; n < set.length(); ++n) {
      ASSERT_EQ(back.channels[ch][n], static_cast<double>(static_cast<float>(set.channels[ch][n])));
    }
  }
}

TEST(RirContainer, RejectsGarbage) {
  testing::TempDir dir;
  {
    std::ofstream f(dir.File("bad.rir"), std::ios::binary);
    f << "not a container at all";
  }
  EXPECT_EQ(CodeOf([&] { ReadRirSet(dir.File("bad.rir")); }), ErrorCode::kCorruptRecord);
}

}  // namespace
}  // namespace rgi
