#include "rgi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rgi/serialize.hpp"

namespace rgi {

std::vector<PeakCandidate> DetectPeaks(const RadonMap& map, double min_prominence, int sep_n,
                                       double sep_theta_deg) {
  const int n_count = map.time_count;
  const int t_count = map.grid.theta_count;
  const int sep_t = std::max(0, static_cast<int>(std::lround(sep_theta_deg / map.grid.theta_step())));
  std::vector<PeakCandidate> peaks;
  for (int n = 0; n < n_count; ++n) {
    for (int j = 0; j < t_count; ++j) {
      const double v = map.at(n, j);
      if (!(v >= min_prominence) || v <= 0.0) continue;
      bool is_peak = true;
      for (int dn = -sep_n; is_peak && dn <= sep_n; ++dn) {
        const int nn = n + dn;
        if (nn < 0 || nn >= n_count) continue;
        for (int dj = -sep_t; dj <= sep_t; ++dj) {
          const int jj = j + dj;
          if (jj < 0 || jj >= t_count || (dn == 0 && dj == 0)) continue;
          const double q = map.at(nn, jj);
          // Ties go to the lexicographically earliest cell.
          const bool earlier = dn < 0 || (dn == 0 && dj < 0);
          if (q > v || (q == v && earlier)) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) peaks.push_back({n, j, map.grid.theta_deg(j), map.grid.rho(n), v});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const PeakCandidate& a, const PeakCandidate& b) {
    if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
    if (a.n != b.n) return a.n < b.n;
    return a.theta_index < b.theta_index;
  });
  return peaks;
}

}  // namespace rgi

namespace rgi {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr WallId kSideIds[] = {WallId::kBack, WallId::kRight, WallId::kFront, WallId::kLeft};

// Offset of the vertex of a parabola through (-1, a), (0, b), (1, c).
double ParabolicOffset(double a, double b, double c) {
  const double denom = a - 2.0 * b + c;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

struct Located {
  PeakCandidate peak;
  double rho = 0.0;        // refined
  double theta_deg = 0.0;  // refined
};

Located Refine(const RadonMap& map, const PeakCandidate& p, bool refine) {
  Located l{p, p.rho, p.theta_deg};
  if (!refine) return l;
  const int n = p.n;
  const int j = p.theta_index;
  if (n > 0 && n + 1 < map.time_count) {
    l.rho = map.grid.rho(n) +
            ParabolicOffset(map.at(n - 1, j), map.at(n, j), map.at(n + 1, j)) * map.grid.c / map.grid.fs;
  }
  if (j > 0 && j + 1 < map.grid.theta_count) {
    l.theta_deg = map.grid.theta_deg(j) +
                  ParabolicOffset(map.at(n, j - 1), map.at(n, j), map.at(n, j + 1)) *
                      map.grid.theta_step();
  }
  return l;
}

Point3 InPlane(double rho, double theta_deg, double y_sign) {
  const double t = theta_deg * kDegToRad;
  return {rho * std::cos(t), y_sign * rho * std::sin(t), 0.0};
}

// Image-coordinate y signs a side wall may produce, preferred first.
std::vector<double> AllowedSigns(WallId id) {
  switch (id) {
    case WallId::kBack:
      return {-1.0};
    case WallId::kFront:
      return {1.0};
    default:
      return {1.0, -1.0};
  }
}

std::optional<Point3> MatchSideWall(WallId id, const Located& c, const Point3& mic,
                                    const RoomConstraints& rc, const EstimatorOptions& opt) {
  for (double sign : AllowedSigns(id)) {
    const Point3 img = InPlane(c.rho, c.theta_deg, sign);
    const double gap = (img - mic).norm();
    if (!(gap > kDegenerateImageEps)) continue;
    const Wall w = WallFromImagePair(mic, img);
    if (!rc.range(id).Contains(w.distance, opt.prior_slack_m)) continue;
    if (std::abs(SideWallDeviationDeg(id, w)) > rc.max_deviation_deg + opt.prior_slack_deg) continue;
    if (0.5 * gap < rc.mic_clearance - opt.prior_slack_m) continue;
    return img;
  }
  return std::nullopt;
}

// Predicted cone angle of an image straight above/below the microphone.
double FloorLineTheta(double mic_x, double rho) {
  return std::acos(std::clamp(mic_x / rho, -1.0, 1.0)) / kDegToRad;
}

PolarWindow SideWallWindow(WallId id, const RoomConstraints& rc, const Point3& mic) {
  PolarWindow win{1e300, 0.0, 180.0, 0.0};
  const DistanceRange r = rc.range(id);
  constexpr int kSteps = 24;
  for (int a = 0; a <= kSteps; ++a) {
    const double dev = -rc.max_deviation_deg + 2.0 * rc.max_deviation_deg * a / kSteps;
    for (int b = 0; b <= kSteps; ++b) {
      const double d = r.min + (r.max - r.min) * b / kSteps;
      const Wall w = MakeSideWall(id, d, dev);
      if (!(w.SignedDistance(mic) > 0.0)) continue;
      const PolarPoint pp = ToPolar(ReflectPoint(mic, w));
      win.rho_min = std::min(win.rho_min, pp.rho);
      win.rho_max = std::max(win.rho_max, pp.rho);
      win.theta_min_deg = std::min(win.theta_min_deg, pp.theta_deg);
      win.theta_max_deg = std::max(win.theta_max_deg, pp.theta_deg);
    }
  }
  if (win.rho_min > win.rho_max) win = PolarWindow{0.0, 0.0, 0.0, 0.0};
  return win;
}

PolarWindow VerticalWindow(const DistanceRange& r, const Point3& mic, double tol_deg) {
  const double rho_o = mic.head<2>().norm();
  PolarWindow win;
  win.rho_min = std::hypot(rho_o, 2.0 * r.min);
  win.rho_max = std::hypot(rho_o, 2.0 * r.max);
  const double t0 = FloorLineTheta(mic.x(), win.rho_min);
  const double t1 = FloorLineTheta(mic.x(), win.rho_max);
  win.theta_min_deg = std::max(0.0, std::min(t0, t1) - tol_deg);
  win.theta_max_deg = std::min(180.0, std::max(t0, t1) + tol_deg);
  return win;
}

PolarWindow ClipToGrid(PolarWindow w, const RadonGrid& grid) {
  const double rho_end = grid.rho(grid.time_count() - 1);
  w.rho_min = std::clamp(w.rho_min, 0.0, rho_end);
  w.rho_max = std::clamp(w.rho_max, 0.0, rho_end);
  w.theta_min_deg = std::clamp(w.theta_min_deg, 0.0, 180.0);
  w.theta_max_deg = std::clamp(w.theta_max_deg, 0.0, 180.0);
  return w;
}

// Farthest a microphone can be from the array centre under the constraints.
double MaxMicRadius(const RoomConstraints& rc) {
  const double x = std::max(rc.range(WallId::kRight).max, rc.range(WallId::kLeft).max);
  const double y = rc.range(WallId::kFront).max;
  return std::hypot(x, y);
}

// |z| of the images of a point at z = 0 between planes z = -d_f and z = d_c.
std::vector<double> VerticalImageHeights(double d_f, double d_c, int max_order) {
  std::vector<double> heights;
  std::vector<std::pair<double, int>> frontier{{0.0, -1}};  // (z, last mirror)
  for (int k = 0; k < max_order; ++k) {
    std::vector<std::pair<double, int>> next;
    for (const auto& [z, last] : frontier) {
      if (last != 0) next.emplace_back(-2.0 * d_f - z, 0);
      if (last != 1) next.emplace_back(2.0 * d_c - z, 1);
    }
    for (const auto& [z, last] : next) heights.push_back(std::abs(z));
    frontier = std::move(next);
  }
  return heights;
}

Point2 PriorMiddleImage(WallId id, const RoomConstraints& rc, const Point3& mic) {
  const DistanceRange r = rc.range(id);
  const Wall nominal = MakeSideWall(id, 0.0);
  // Keep the wall on the far side of the microphone.
  const double d = std::max(0.5 * (r.min + r.max), rc.mic_clearance - nominal.normal.dot(mic));
  return ReflectPoint(mic, MakeSideWall(id, d)).head<2>();
}

}  // namespace

PriorRegions BuildPriorRegions(const RoomConstraints& rc, const Point3& mic, const RadonGrid& grid) {
  PriorRegions pr;
  pr.mic = ClipToGrid({rc.mic_clearance, MaxMicRadius(rc), 0.0, 180.0}, grid);
  for (WallId id : kSideIds) {
    pr.walls[static_cast<int>(id)] = ClipToGrid(SideWallWindow(id, rc, mic), grid);
  }
  // Radial bands use the tilt-free floor/ceiling geometry; the cone-angle
  // tolerance absorbs the microphone position error.
  pr.walls[static_cast<int>(WallId::kFloor)] =
      ClipToGrid(VerticalWindow(rc.range(WallId::kFloor), mic, 5.0), grid);
  pr.walls[static_cast<int>(WallId::kCeiling)] =
      ClipToGrid(VerticalWindow(rc.range(WallId::kCeiling), mic, 5.0), grid);
  return pr;
}

EstimateResult EstimateLabelsDetailed(const RadonMap& map, const RoomConstraints& rc,
                                      const EstimatorOptions& opt) {
  std::vector<PeakCandidate> peaks = DetectPeaks(map, opt.min_prominence, opt.sep_n, opt.sep_theta_deg);
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const PeakCandidate& a, const PeakCandidate& b) { return a.n < b.n; });

  // Direct path: earliest strong peak at a feasible microphone position.
  const PolarWindow mic_window = ClipToGrid({rc.mic_clearance, MaxMicRadius(rc), 0.0, 180.0}, map.grid);
  const PeakCandidate* direct = nullptr;
  for (const PeakCandidate& p : peaks) {
    if (p.amplitude >= opt.direct_min_amplitude && mic_window.Contains(p.rho, p.theta_deg)) {
      direct = &p;
      break;
    }
  }
  if (!direct) {
    throw Error(ErrorCode::kMissingDirectPath, "no direct-path peak in the microphone window");
  }

  EstimateResult result;
  result.direct = *direct;
  const Located mic_peak = Refine(map, *direct, opt.refine);
  const Point3 mic = InPlane(mic_peak.rho, mic_peak.theta_deg, 1.0);
  const double rho_o = mic_peak.rho;
  result.labels.mic = mic.head<2>();

  std::vector<Located> echoes;
  for (const PeakCandidate& p : peaks) {
    if (p.n <= direct->n || p.amplitude < opt.echo_min_amplitude) continue;
    echoes.push_back(Refine(map, p, opt.refine));
  }
  // Floor and ceiling lie on the microphone's cone line; side walls fit
  // their priors. Both are chosen jointly: a hypothesis (floor, ceiling,
  // four side walls) scores one point per predicted higher-order image found
  // among the peaks and loses a fixed penalty per unassigned wall. Ties go
  // to the earliest candidates.
  constexpr double kMissingPenalty = 100.0;
  auto on_line = [&](double rho, double theta_deg) {
    return rho > rho_o &&
           std::abs(theta_deg - FloorLineTheta(mic.x(), rho)) <= opt.floor_theta_tol_deg;
  };
  std::vector<Located> all_peaks;
  std::vector<Located> line_peaks;
  for (const PeakCandidate& p : peaks) {
    if (p.n <= direct->n) continue;
    all_peaks.push_back(Refine(map, p, opt.refine));
    if (on_line(all_peaks.back().rho, all_peaks.back().theta_deg)) line_peaks.push_back(all_peaks.back());
  }
  const double rho_end = map.grid.rho(map.time_count - 1);
  auto near = [&](const Located& e, const Point3& img, double z) {
    const double rho = std::hypot(img.head<2>().norm(), z);
    if (std::abs(e.rho - rho) > opt.match_rho_m) return false;
    const double theta = std::acos(std::clamp(img.x() / rho, -1.0, 1.0)) / kDegToRad;
    return std::abs(e.theta_deg - theta) <= opt.match_theta_deg;
  };
  auto present = [&](const Point3& img, double z) {
    if (std::hypot(img.head<2>().norm(), z) > rho_end) return false;
    for (const Located& e : all_peaks) {
      if (near(e, img, z)) return true;
    }
    return false;
  };

  auto vertical_candidates = [&](WallId id) {
    std::vector<std::size_t> out;
    const DistanceRange r = rc.range(id);
    for (std::size_t i = 0; i < echoes.size(); ++i) {
      if (!on_line(echoes[i].rho, echoes[i].theta_deg)) continue;
      if (r.Contains(FloorCeilingDistance(echoes[i].rho, rho_o), opt.prior_slack_m)) out.push_back(i);
    }
    return out;
  };
  // Higher-order vertical images of the microphone present on the cone line.
  auto vertical_support = [&](double d_f, double d_c) {
    int count = 0;
    const auto heights = VerticalImageHeights(d_f, d_c, 3);
    for (std::size_t h = 2; h < heights.size(); ++h) {  // skip the first-order pair
      const double rho = std::hypot(rho_o, heights[h]);
      if (rho > rho_end) continue;
      for (const Located& l : line_peaks) {
        if (std::abs(l.rho - rho) <= opt.match_rho_m) {
          ++count;
          break;
        }
      }
    }
    return count;
  };

  struct Candidate {
    Point3 image;
    Wall wall;
    std::size_t echo;
  };
  struct SideAssignment {
    double score = -1e300;
    std::array<int, kNumSideWalls> choice{-1, -1, -1, -1};  // -1 leaves the wall unassigned
    std::array<std::vector<Candidate>, kNumSideWalls> cands;
  };
  // Side-wall candidates are echoes fitting a wall's prior that neither the
  // floor/ceiling picks nor their vertical images explain. The first few per
  // wall enter a joint search scored on vertical shifts of each wall image
  // and second-order images between walls.
  auto assign_sides = [&](std::optional<std::size_t> f, std::optional<std::size_t> c) {
    std::vector<double> heights{0.0};
    if (f && c) {
      const auto more = VerticalImageHeights(FloorCeilingDistance(echoes[*f].rho, rho_o),
                                             FloorCeilingDistance(echoes[*c].rho, rho_o), 2);
      heights.insert(heights.end(), more.begin(), more.end());
    }
    SideAssignment best;
    auto& cands = best.cands;
    for (std::size_t i = 0; i < echoes.size(); ++i) {
      if (i == f || i == c) continue;
      bool vertical_of_mic = false;
      for (double z : heights) {
        if (z > 0.0 && near(echoes[i], mic, z)) vertical_of_mic = true;
      }
      if (vertical_of_mic) continue;
      for (WallId id : kSideIds) {
        auto& list = cands[static_cast<int>(id)];
        if (static_cast<int>(list.size()) >= opt.max_wall_candidates) continue;
        if (const auto img = MatchSideWall(id, echoes[i], mic, rc, opt)) {
          list.push_back({*img, WallFromImagePair(mic, *img), i});
        }
      }
    }
    std::array<int, kNumSideWalls> choice{};
    auto evaluate = [&]() {
      double score = 0.0;
      std::size_t rank_sum = 0;
      for (int w = 0; w < kNumSideWalls; ++w) {
        if (choice[w] < 0) {
          score -= kMissingPenalty;
          continue;
        }
        const Candidate& cw = cands[w][choice[w]];
        rank_sum += cw.echo;
        for (int v = 0; v < w; ++v) {
          if (choice[v] >= 0 && cands[v][choice[v]].echo == cw.echo) return;
        }
        for (std::size_t h = 1; h < heights.size(); ++h) score += present(cw.image, heights[h]);
        for (int v = 0; v < kNumSideWalls; ++v) {
          if (v == w || choice[v] < 0) continue;
          const Point3 second = ReflectPoint(cw.image, cands[v][choice[v]].wall);
          // The first-order image of one wall must not be a second-order
          // image of another.
          if (near(echoes[cands[v][choice[v]].echo], second, 0.0)) return;
          for (double z : heights) score += present(second, z);
        }
      }
      score -= 1e-6 * static_cast<double>(rank_sum);
      if (score > best.score) {
        best.score = score;
        best.choice = choice;
      }
    };
    for (choice[0] = -1; choice[0] < static_cast<int>(cands[0].size()); ++choice[0]) {
      for (choice[1] = -1; choice[1] < static_cast<int>(cands[1].size()); ++choice[1]) {
        for (choice[2] = -1; choice[2] < static_cast<int>(cands[2].size()); ++choice[2]) {
          for (choice[3] = -1; choice[3] < static_cast<int>(cands[3].size()); ++choice[3]) {
            evaluate();
          }
        }
      }
    }
    return best;
  };

  std::optional<std::size_t> floor_idx;
  std::optional<std::size_t> ceiling_idx;
  SideAssignment sides;
  {
    std::vector<std::optional<std::size_t>> fc;
    std::vector<std::optional<std::size_t>> cc;
    for (std::size_t i : vertical_candidates(WallId::kFloor)) fc.emplace_back(i);
    for (std::size_t i : vertical_candidates(WallId::kCeiling)) cc.emplace_back(i);
    fc.emplace_back(std::nullopt);
    cc.emplace_back(std::nullopt);
    // Vertical support ranks the pairs; the side-wall assignment breaks ties.
    struct Pair {
      std::optional<std::size_t> f;
      std::optional<std::size_t> c;
      double score;
    };
    std::vector<Pair> pairs;
    for (const auto& f : fc) {
      for (const auto& c : cc) {
        if (f && c && echoes[*c].rho <= echoes[*f].rho) continue;
        double score = -kMissingPenalty * ((f ? 0 : 1) + (c ? 0 : 1));
        if (f && c) {
          score += vertical_support(FloorCeilingDistance(echoes[*f].rho, rho_o),
                                    FloorCeilingDistance(echoes[*c].rho, rho_o));
        }
        pairs.push_back({f, c, score});
      }
    }
    double top = -1e300;
    for (const Pair& p : pairs) top = std::max(top, p.score);
    double best = -1e300;
    for (const Pair& p : pairs) {
      if (p.score < top) continue;
      SideAssignment s = assign_sides(p.f, p.c);
      if (s.score > best) {
        best = s.score;
        floor_idx = p.f;
        ceiling_idx = p.c;
        sides = std::move(s);
      }
    }
  }

  auto fail_or_fallback = [&](WallId id) {
    if (!opt.fallback_to_prior) {
      throw Error(ErrorCode::kMissingWallPeak,
                  "no candidate peak for the " + std::string(WallName(id)) + " wall", id);
    }
    result.fallbacks.push_back(id);
  };

  if (floor_idx) {
    result.labels.floor_z = -2.0 * FloorCeilingDistance(echoes[*floor_idx].rho, rho_o);
  } else {
    fail_or_fallback(WallId::kFloor);
    const DistanceRange r = rc.range(WallId::kFloor);
    result.labels.floor_z = -(r.min + r.max);
  }
  if (ceiling_idx) {
    result.labels.ceiling_z = 2.0 * FloorCeilingDistance(echoes[*ceiling_idx].rho, rho_o);
  } else {
    fail_or_fallback(WallId::kCeiling);
    const DistanceRange r = rc.range(WallId::kCeiling);
    result.labels.ceiling_z = r.min + r.max;
  }
  if (floor_idx && ceiling_idx) {
    const double d_c = FloorCeilingDistance(echoes[*ceiling_idx].rho, rho_o);
    const double d_f = FloorCeilingDistance(echoes[*floor_idx].rho, rho_o);
    result.floor_ceiling_ambiguous =
        rc.range(WallId::kFloor).Contains(d_c) && rc.range(WallId::kCeiling).Contains(d_f);
  }

  for (WallId id : kSideIds) {
    const int w = static_cast<int>(id);
    if (sides.choice[w] >= 0) {
      result.labels.side(id) = sides.cands[w][sides.choice[w]].image.head<2>();
    } else {
      fail_or_fallback(id);
      result.labels.side(id) = PriorMiddleImage(id, rc, mic);
    }
  }
  return result;
}

LabelVector EstimateLabels(const RadonMap& map, const RoomConstraints& constraints,
                           const EstimatorOptions& options) {
  return EstimateLabelsDetailed(map, constraints, options).labels;
}

RoomGeometry InferRoom(const LabelVector& labels) { return RoomFromLabels(labels); }

namespace {

std::string RequireString(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("label record field '") + key +
                                                 "' is missing or not a string");
  }
  return j[key].get<std::string>();
}

}  // namespace

nlohmann::ordered_json LabelRecordToJson(const LabelRecord& record) {
  nlohmann::ordered_json j;
  j["sample_id"] = record.sample_id;
  j["estimator"] = record.estimator;
  j["grid_hash"] = record.grid_hash;
  j.update(LabelsToJson(record.labels));
  return j;
}

LabelRecord LabelRecordFromJson(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "label record is not an object");
  LabelRecord r;
  r.sample_id = RequireString(j, "sample_id");
  r.estimator = RequireString(j, "estimator");
  r.grid_hash = RequireString(j, "grid_hash");
  r.labels = LabelsFromJson(j);
  return r;
}

void WritePredictions(const std::string& path, const std::vector<LabelRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const LabelRecord& r : records) arr.push_back(LabelRecordToJson(r));
  WriteJsonFile(path, arr);
}

std::vector<LabelRecord> ReadPredictions(const std::string& path) {
  const nlohmann::ordered_json arr = ReadJsonFile(path);
  if (!arr.is_array()) throw Error(ErrorCode::kInvalidArgument, path + ": expected a JSON array");
  std::vector<LabelRecord> out;
  out.reserve(arr.size());
  for (const auto& j : arr) out.push_back(LabelRecordFromJson(j));
  return out;
}

}  // namespace rgi
