// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "rgi/dataset.hpp"
#include "rgi/estimator.hpp"
#include "rgi/metrics.hpp"

namespace rgi {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

Outcome GeometryRoundTrip() {
  const RoomConstraints rc;
  std::vector<SampledRoom> rooms;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) rooms.push_back(SampleRoom(rc, seed));
  const auto start = Clock::now();
  double max_d = 0.0;
  double max_t = 0.0;
  for (const SampledRoom& s : rooms) {
    const RoomError e = ComputeRoomError(s.room, RoomFromLabels(LabelsFromRoom(s.room, s.mic)));
    for (const WallError& w : e.walls) {
      max_d = std::max(max_d, w.eps_d);
      max_t = std::max(max_t, w.eps_theta_deg.value_or(0.0));
    }
  }
  const double t = Seconds(start);
  return {max_d < 1e-9 && max_t < 1e-7 && t < 1.0,
          Format("1000 rooms, max eps_d=%.3g m (<1e-9), max eps_theta=%.3g deg (<1e-7), %.3f s (<1)",
                 max_d, max_t, t)};
}

Outcome ImagePairOracle() {
  std::mt19937_64 g(20240601);
  double worst = 0.0;
  int pairs = 0;
  while (pairs < 1000) {
    const Wall w = oracle::RandomWall(g);
    const Point3 p = oracle::RandomPoint(g);
    const double s = w.normal.dot(p) + w.distance;
    if (!(s > 1e-3)) continue;  // points on the interior side
    ++pairs;
    const oracle::Vec3 img = oracle::Mirror(oracle::ToVec(p), oracle::ToVec(w.normal), w.distance);
    const Point3 lib_img = ReflectPoint(p, w);
    const Wall back = WallFromImagePair(p, lib_img);
    for (int k = 0; k < 3; ++k) {
      worst = std::max(worst, std::abs(lib_img[k] - img[k]));
      worst = std::max(worst, std::abs(back.normal[k] - w.normal[k]));
    }
    worst = std::max(worst, std::abs(back.distance - w.distance));
  }
  return {worst < 1e-9, Format("1000 pairs, max deviation %.3g (<1e-9)", worst)};
}

// Distance from fractional sample `t` to the nearest positive local maximum of `h`.
double NearestPeakOffset(const std::vector<double>& h, double t) {
  double best = 1e300;
  const long lo = std::max<long>(1, static_cast<long>(std::floor(t)) - 3);
  const long hi = std::min<long>(static_cast<long>(h.size()) - 2, static_cast<long>(std::ceil(t)) + 3);
  for (long k = lo; k <= hi; ++k) {
    if (h[k] > 0.0 && h[k] >= h[k - 1] && h[k] >= h[k + 1]) best = std::min(best, std::abs(k - t));
  }
  return best;
}

Outcome ImageMethodToa() {
  const RoomConstraints rc;
  const UlaConfig ula;
  const SimParams params;
  const auto speakers = ula.Positions();
  // Two arrivals closer than this, the weaker above this fraction of the
  // stronger, merge into one lobe of the band-limited kernel.
  const double merge_samples = 3.0;
  const double merge_ratio = 0.25;
  const auto start = Clock::now();
  int checked = 0;
  int merged = 0;
  int missed = 0;
  int isolated_missed = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SampledRoom s = SampleRoom(rc, seed);
    const RirSet set = SimulateRirs(s.room, s.mic, ula, s.absorption, params);
    for (int ch = 0; ch < set.count(); ++ch) {
      const auto all =
          EnumerateImages(s.room, speakers[ch], params.max_order, s.absorption, s.mic.position);
      auto arrival = [&](const ImageSource& img) {
        const double dist = (img.position - s.mic.position).norm();
        return std::pair{params.fs * dist / params.c, img.gain / dist};
      };
      for (const ImageSource& img : all) {
        if (img.order > 1) continue;
        const auto [t, amp] = arrival(img);
        // Each arrival on its own peaks at the analytic delay.
        const ImageSource one[] = {img};
        if (!(NearestPeakOffset(SynthesizeRir(one, s.mic.position, params), t) <= 0.5)) ++isolated_missed;
        bool resolvable = true;
        for (const ImageSource& other : all) {
          if (&other == &img) continue;
          const auto [t2, amp2] = arrival(other);
          if (std::abs(t2 - t) < merge_samples && amp2 >= merge_ratio * amp) resolvable = false;
        }
        if (!resolvable) {
          ++merged;
          continue;
        }
        ++checked;
        const double off = NearestPeakOffset(set.channels[ch], t);
        if (!(off <= 1.0)) ++missed;
        worst = std::max(worst, off);
      }
    }
  }
  const double t = Seconds(start);
  return {missed == 0 && isolated_missed == 0 && t < 60.0,
          Format("100 rooms, %d resolvable arrivals, %d off by >1 sample (worst %.3f), "
                 "%d merged with a neighbour, %d isolated off by >0.5, %.1f s (<60)",
                 checked, missed, worst, merged, isolated_missed, t)};
}

Outcome RadonOracle() {
  const RadonGrid grid;
  const UlaConfig ula;
  SimParams params;
  std::vector<double> xs;
  for (const auto& p : ula.Positions()) xs.push_back(p.x());
  const SteeringTable steering(ula, grid);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SampledRoom s = SampleRoom(RoomConstraints{}, 5000 + seed);
    const RirSet rirs = SimulateRirs(s.room, s.mic, ula, s.absorption, params);
    const RadonMap map = ComputeRadonMap(rirs, steering);
    const auto ref = oracle::NaiveRadon(rirs, xs, grid.fs, grid.c, grid.time_count(), grid.theta_count);
    const double scale = *std::max_element(ref.begin(), ref.end());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      worst = std::max(worst, std::abs(map.values[i] - ref[i]) / scale);
    }
  }
  const int n = grid.time_count();
  return {worst <= 1e-6 && n == 2099,
          Format("20 fixtures on %dx%dx%d, max relative deviation %.3g (<=1e-6), N=%d (==2099)", n,
                 grid.theta_count, ula.count, worst, n)};
}

Outcome EndToEnd() {
  const RoomConstraints rc;
  const UlaConfig ula;
  const SimParams params;
  const SteeringTable steering(ula, RadonGrid{});
  EstimatorOptions opt;
  opt.fallback_to_prior = true;
  const auto start = Clock::now();
  std::vector<RoomError> errors;
  int fallbacks = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SampledRoom s = SampleRoom(rc, seed);
    const RadonMap map =
        ComputeRadonMap(SimulateRirs(s.room, s.mic, ula, s.absorption, params), steering);
    const EstimateResult r = EstimateLabelsDetailed(map, rc, opt);
    fallbacks += static_cast<int>(r.fallbacks.size());
    errors.push_back(ComputeRoomError(s.room, InferRoom(r.labels)));
  }
  const double t = Seconds(start);
  const AggregateReport rep = Aggregate(errors);
  return {rep.room_d.mean <= 0.15 && rep.room_theta.mean <= 5.0 && t < 600.0,
          Format("50 rooms, mean E_d=%.2f cm (<=15), mean E_theta=%.2f deg (<=5), "
                 "%d prior fallbacks, %.1f s (<600)",
                 100.0 * rep.room_d.mean, rep.room_theta.mean, fallbacks, t)};
}

Outcome LossAndMetricFixtures() {
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  const RoomGeometry room = MakeShoebox(0.5, 2.0, 3.5, 2.0, 1.0, 1.5);
  MicPose mic;
  mic.position = {0.3, 1.0, 0.0};
  const LabelVector truth = LabelsFromRoom(room, mic);
  check(ComputeLoss(truth, truth), 0.0);
  LabelVector p = truth;
  p.left += Point2(3.0, 4.0);
  check(ComputeLoss(p, truth), 5.0 / 7.0);
  const double e = 0.25;
  p = truth;
  p.mic.y() += e;
  p.back.x() -= e;
  p.right.y() += e;
  p.front += Point2(-0.6, 0.8) * e;
  p.left.x() += e;
  p.floor_z -= e;
  p.ceiling_z += e;
  check(ComputeLoss(p, truth), e);

  RoomGeometry est = room;
  const double c = 0.12;
  for (auto& w : est.side) w.distance += c;
  est.floor_distance += c;
  est.ceiling_distance -= c;
  check(ComputeRoomError(room, est).e_d, c);
  est = room;
  est.side[1].distance += 0.6;
  check(ComputeRoomError(room, est).e_d, 0.6 / std::sqrt(6.0));
  return {worst <= 1e-12, Format("6 fixtures, max deviation %.3g (<=1e-12)", worst)};
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

Outcome Determinism() {
  const auto root = std::filesystem::temp_directory_path() /
                    ("rgi-acceptance-" + std::to_string(std::random_device{}()));
  DatasetConfig cfg;
  cfg.counts = {4, 1, 1};
  cfg.base_seed = 12345;
  GenerateDataset(cfg, (root / "a").string(), 1);
  GenerateDataset(cfg, (root / "b").string(), 2);
  int differing = 0;
  std::uintmax_t bytes = 0;
  for (const char* name : {"manifest.json", "train.bin", "val.bin", "test.bin"}) {
    const std::string a = Slurp(root / "a" / name);
    const std::string b = Slurp(root / "b" / name);
    bytes += a.size();
    if (a.empty() || a != b) ++differing;
  }
  std::filesystem::remove_all(root);
  return {differing == 0,
          Format("counts (4,1,1) generated twice, %d of 4 files differ, %ju bytes compared", differing,
                 bytes)};
}

}  // namespace
}  // namespace rgi

int main() {
  struct Criterion {
    const char* name;
    std::function<rgi::Outcome()> run;
  };
  const Criterion criteria[] = {
      {"geometry-round-trip", rgi::GeometryRoundTrip},
      {"image-pair-oracle", rgi::ImagePairOracle},
      {"image-method-toa", rgi::ImageMethodToa},
      {"radon-oracle", rgi::RadonOracle},
      {"end-to-end", rgi::EndToEnd},
      {"loss-metric-fixtures", rgi::LossAndMetricFixtures},
      {"determinism", rgi::Determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    rgi::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
