#include "rgi/serialize.hpp"

#include <set>
#include <string>

#include "rgi/io.hpp"

namespace rgi {

namespace {

constexpr const char* kLabelFields[LabelVector::kSize] = {
    "mic_x",   "mic_y",   "back_x", "back_y", "right_x", "right_y",
    "front_x", "front_y", "left_x", "left_y", "floor_z", "ceiling_z"};

[[noreturn]] void Fail(const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); }

void RequireObject(const Json& j, const char* what) {
  if (!j.is_object()) Fail(std::string(what) + " must be a JSON object");
}

void RejectUnknown(const Json& j, const char* what, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) Fail(std::string(what) + ": unknown key '" + key + "'");
  }
}

double Number(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    Fail(std::string("'") + key + "' is missing or not a number");
  }
  return j[key].get<double>();
}

void MaybeNumber(const Json& j, const char* key, double& out) {
  if (j.contains(key)) out = Number(j, key);
}

void MaybeInt(const Json& j, const char* key, int& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) Fail(std::string("'") + key + "' must be an integer");
  out = j[key].get<int>();
}

Point3 PointFromJson(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) Fail(std::string(what) + " must be a 3-element array");
  Point3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) Fail(std::string(what) + " must contain numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

Json PointJson(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

}  // namespace

Json ToJson(const RoomConstraints& c) {
  Json ranges = Json::object();
  for (int i = 0; i < kNumWalls; ++i) {
    ranges[std::string(WallName(static_cast<WallId>(i)))] =
        Json::array({c.distance[i].min, c.distance[i].max});
  }
  return {{"distance", ranges},
          {"max_deviation_deg", c.max_deviation_deg},
          {"min_height", c.min_height},
          {"mic_clearance", c.mic_clearance},
          {"array_half_width", c.array_half_width},
          {"absorption", Json::array({c.absorption_lo, c.absorption_hi})}};
}

Json ToJson(const UlaConfig& ula) { return {{"count", ula.count}, {"spacing", ula.spacing}}; }

Json ToJson(const SimParams& p) {
  return {{"fs", p.fs},
          {"c", p.c},
          {"max_order", p.max_order},
          {"lpf_cutoff", p.lpf_cutoff},
          {"duration_samples", p.duration_samples}};
}

Json ToJson(const RadonGrid& g) {
  return {{"fs", g.fs},
          {"c", g.c},
          {"rho_max", g.rho_max},
          {"theta_count", g.theta_count},
          {"time_count", g.time_count()},
          {"hash", g.Hash()}};
}

Json ToJson(const Wall& w) {
  return {{"normal", PointJson(w.normal)}, {"distance", w.distance}};
}

Json ToJson(const RoomGeometry& room) {
  Json j = Json::object();
  for (int i = 0; i < kNumSideWalls; ++i) {
    j[std::string(WallName(static_cast<WallId>(i)))] = ToJson(room.side[i]);
  }
  j["floor"] = room.floor_distance;
  j["ceiling"] = room.ceiling_distance;
  return j;
}

Json ToJson(const SampledRoom& s) {
  Json absorption = Json::object();
  for (int i = 0; i < kNumWalls; ++i) {
    absorption[std::string(WallName(static_cast<WallId>(i)))] = s.absorption[i];
  }
  return {{"room", ToJson(s.room)}, {"mic", PointJson(s.mic.position)}, {"absorption", absorption}};
}

void Update(const Json& j, RoomConstraints& c) {
  RequireObject(j, "constraints");
  RejectUnknown(j, "constraints", {"distance", "max_deviation_deg", "min_height", "mic_clearance",
                                   "array_half_width", "absorption"});
  if (j.contains("distance")) {
    const Json& d = j["distance"];
    RequireObject(d, "constraints.distance");
    for (const auto& [key, value] : d.items()) {
      int idx = -1;
      for (int i = 0; i < kNumWalls; ++i) {
        if (key == WallName(static_cast<WallId>(i))) idx = i;
      }
      if (idx < 0) Fail("constraints.distance: unknown wall '" + key + "'");
      if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
        Fail("constraints.distance." + key + " must be [min, max]");
      }
      c.distance[idx] = {value[0].get<double>(), value[1].get<double>()};
    }
  }
  MaybeNumber(j, "max_deviation_deg", c.max_deviation_deg);
  MaybeNumber(j, "min_height", c.min_height);
  MaybeNumber(j, "mic_clearance", c.mic_clearance);
  MaybeNumber(j, "array_half_width", c.array_half_width);
  if (j.contains("absorption")) {
    const Json& a = j["absorption"];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      Fail("constraints.absorption must be [lo, hi]");
    }
    c.absorption_lo = a[0].get<double>();
    c.absorption_hi = a[1].get<double>();
  }
}

void Update(const Json& j, UlaConfig& ula) {
  RequireObject(j, "ula");
  RejectUnknown(j, "ula", {"count", "spacing"});
  MaybeInt(j, "count", ula.count);
  MaybeNumber(j, "spacing", ula.spacing);
}

void Update(const Json& j, SimParams& p) {
  RequireObject(j, "sim");
  RejectUnknown(j, "sim", {"fs", "c", "max_order", "lpf_cutoff", "duration_samples"});
  MaybeNumber(j, "fs", p.fs);
  MaybeNumber(j, "c", p.c);
  MaybeInt(j, "max_order", p.max_order);
  MaybeNumber(j, "lpf_cutoff", p.lpf_cutoff);
  MaybeInt(j, "duration_samples", p.duration_samples);
}

void Update(const Json& j, RadonGrid& g) {
  RequireObject(j, "grid");
  // time_count and hash are derived; accept them so a manifest's grid block
  // can be fed back as config.
  RejectUnknown(j, "grid", {"fs", "c", "rho_max", "theta_count", "time_count", "hash"});
  MaybeNumber(j, "fs", g.fs);
  MaybeNumber(j, "c", g.c);
  MaybeNumber(j, "rho_max", g.rho_max);
  MaybeInt(j, "theta_count", g.theta_count);
}

Wall WallFromJson(const Json& j) {
  RequireObject(j, "wall");
  if (!j.contains("normal")) Fail("wall: missing 'normal'");
  Wall w;
  w.normal = PointFromJson(j["normal"], "wall.normal");
  w.distance = Number(j, "distance");
  return w;
}

RoomGeometry RoomFromJson(const Json& j) {
  RequireObject(j, "room");
  RoomGeometry room;
  for (int i = 0; i < kNumSideWalls; ++i) {
    const std::string name(WallName(static_cast<WallId>(i)));
    if (!j.contains(name)) Fail("room: missing '" + name + "'");
    room.side[i] = WallFromJson(j[name]);
  }
  room.floor_distance = Number(j, "floor");
  room.ceiling_distance = Number(j, "ceiling");
  return room;
}

SampledRoom SampledRoomFromJson(const Json& j) {
  RequireObject(j, "room fixture");
  if (!j.contains("room") || !j.contains("mic")) Fail("room fixture needs 'room' and 'mic'");
  SampledRoom s;
  s.room = RoomFromJson(j["room"]);
  s.mic.position = PointFromJson(j["mic"], "mic");
  if (j.contains("absorption")) {
    const Json& a = j["absorption"];
    RequireObject(a, "absorption");
    for (int i = 0; i < kNumWalls; ++i) {
      s.absorption[i] = Number(a, std::string(WallName(static_cast<WallId>(i))).c_str());
    }
  } else {
    s.absorption.fill(0.0);
  }
  return s;
}

Json LabelsToJson(const LabelVector& labels) {
  Json j = Json::object();
  const auto values = labels.ToArray();
  for (int i = 0; i < LabelVector::kSize; ++i) j[kLabelFields[i]] = values[i];
  return j;
}

LabelVector LabelsFromJson(const Json& j) {
  RequireObject(j, "labels");
  std::array<double, LabelVector::kSize> values{};
  for (int i = 0; i < LabelVector::kSize; ++i) values[i] = Number(j, kLabelFields[i]);
  return LabelVector::FromArray(values);
}

Json ReadJsonFile(const std::string& path) {
  try {
    return Json::parse(io::ReadTextFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    Fail(path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& j) {
  io::WriteFileAtomic(path, j.dump(2) + "\n");
}

}  // namespace rgi
