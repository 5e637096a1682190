#pragma once

// JSON forms of the configuration structs, rooms and label vectors.
//
// The Update* functions apply a partial JSON object on top of existing
// values, so a config file only needs the keys it overrides. Unknown keys and
// wrongly typed values throw InvalidArgument.

#include "json.hpp"
#include "rgi/geometry.hpp"
#include "rgi/radon.hpp"
#include "rgi/simulator.hpp"

namespace rgi {

using Json = nlohmann::ordered_json;

Json ToJson(const RoomConstraints& c);
Json ToJson(const UlaConfig& ula);
Json ToJson(const SimParams& p);
Json ToJson(const RadonGrid& g);
Json ToJson(const Wall& w);
Json ToJson(const RoomGeometry& room);
Json ToJson(const SampledRoom& s);

void Update(const Json& j, RoomConstraints& c);
void Update(const Json& j, UlaConfig& ula);
void Update(const Json& j, SimParams& p);
void Update(const Json& j, RadonGrid& g);

Wall WallFromJson(const Json& j);
RoomGeometry RoomFromJson(const Json& j);
SampledRoom SampledRoomFromJson(const Json& j);

/// Flat object with mic_x, mic_y, back_x, ..., floor_z, ceiling_z.
Json LabelsToJson(const LabelVector& labels);
/// Reads the 12 label fields from `j`, ignoring any other keys.
LabelVector LabelsFromJson(const Json& j);

/// Parses a JSON file; syntax errors throw InvalidArgument naming the file.
Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& j);

}  // namespace rgi
