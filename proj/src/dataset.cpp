#include "rgi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "rgi/io.hpp"

namespace rgi {

namespace {

constexpr Split kSplits[] = {Split::kTrain, Split::kVal, Split::kTest};
constexpr const char* kManifestName = "manifest.json";

struct Encoded {
  GeneratedSample generated;
  io::Bytes bytes;
};

[[noreturn]] void Rethrow(const std::string& id, const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    throw Error(e.code(), id + ": " + e.what(), e.wall());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIo, id + ": " + e.what());
  }
}

Json RecordToJson(const SampleRecord& r) {
  Json j;
  j["id"] = r.id;
  j["split"] = SplitName(r.split);
  j["index"] = r.index;
  j["seed"] = r.seed;
  j["offset"] = r.offset;
  j["size"] = r.size;
  j["crc32"] = r.crc32;
  j["label"] = LabelsToJson(r.label);
  const Json s = ToJson(r.sample);
  j["room"] = s["room"];
  j["mic"] = s["mic"];
  j["absorption"] = s["absorption"];
  return j;
}

template <typename T>
T Field(const Json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kCorruptRecord, std::string("manifest field '") + key + "' missing");
  }
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kCorruptRecord, std::string("manifest field '") + key + "' has the wrong type");
  }
}

SampleRecord RecordFromJson(const Json& j) {
  SampleRecord r;
  r.id = Field<std::string>(j, "id");
  r.split = ParseSplit(Field<std::string>(j, "split"));
  r.index = Field<std::uint32_t>(j, "index");
  r.seed = Field<std::uint64_t>(j, "seed");
  r.offset = Field<std::uint64_t>(j, "offset");
  r.size = Field<std::uint64_t>(j, "size");
  r.crc32 = Field<std::uint32_t>(j, "crc32");
  if (!j.contains("label") || !j.contains("room") || !j.contains("mic") || !j.contains("absorption")) {
    throw Error(ErrorCode::kCorruptRecord, "manifest record " + r.id + " is incomplete");
  }
  r.label = LabelsFromJson(j["label"]);
  r.sample = SampledRoomFromJson(Json{{"room", j["room"]}, {"mic", j["mic"]}, {"absorption", j["absorption"]}});
  return r;
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  for (Split s : kSplits) {
    if (name == SplitName(s)) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown split '" + std::string(name) + "'");
}

int& SplitCounts::operator[](Split s) {
  switch (s) {
    case Split::kTrain:
      return train;
    case Split::kVal:
      return val;
    case Split::kTest:
      return test;
  }
  return train;
}

int SplitCounts::operator[](Split s) const { return const_cast<SplitCounts&>(*this)[s]; }

std::uint64_t SampleSeed(std::uint64_t base_seed, Split split, std::uint32_t index) {
  return base_seed + (static_cast<std::uint64_t>(split) << 32) + index;
}

std::string SampleId(Split split, std::uint32_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06u", std::string(SplitName(split)).c_str(), index);
  return buf;
}

void DatasetConfig::Validate() const {
  for (Split s : kSplits) {
    if (counts[s] < 0) throw Error(ErrorCode::kInvalidArgument, "split counts must be non-negative");
  }
  constraints.Validate();
  ula.Validate();
  sim.Validate();
  grid.Validate();
  if (sim.fs != grid.fs) throw Error(ErrorCode::kGridMismatch, "simulation fs differs from grid fs");
}

const SampleRecord& DatasetManifest::Find(std::string_view id) const {
  for (const SampleRecord& r : records) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::kNotFound, "no sample '" + std::string(id) + "' in the manifest");
}

std::vector<const SampleRecord*> DatasetManifest::SplitRecords(Split split) const {
  std::vector<const SampleRecord*> out;
  for (const SampleRecord& r : records) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

std::string DatasetManifest::ShardPath(Split split) const {
  return (std::filesystem::path(directory) / (std::string(SplitName(split)) + ".bin")).string();
}

Json ManifestToJson(const DatasetManifest& m) {
  Json j;
  j["version"] = m.version;
  j["counts"] = {{"train", m.config.counts.train},
                 {"val", m.config.counts.val},
                 {"test", m.config.counts.test}};
  j["base_seed"] = m.config.base_seed;
  j["grid"] = ToJson(m.config.grid);
  j["ula"] = ToJson(m.config.ula);
  j["sim"] = ToJson(m.config.sim);
  j["constraints"] = ToJson(m.config.constraints);
  Json shards = Json::object();
  for (Split s : kSplits) shards[std::string(SplitName(s))] = std::string(SplitName(s)) + ".bin";
  j["shards"] = shards;
  Json records = Json::array();
  for (const SampleRecord& r : m.records) records.push_back(RecordToJson(r));
  j["records"] = records;
  return j;
}

DatasetManifest ManifestFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kCorruptRecord, "manifest is not a JSON object");
  DatasetManifest m;
  m.version = Field<int>(j, "version");
  if (m.version != DatasetManifest::kVersion) {
    throw Error(ErrorCode::kCorruptRecord, "unsupported manifest version " + std::to_string(m.version));
  }
  const Json counts = Field<Json>(j, "counts");
  for (Split s : kSplits) m.config.counts[s] = Field<int>(counts, std::string(SplitName(s)).c_str());
  m.config.base_seed = Field<std::uint64_t>(j, "base_seed");
  Update(Field<Json>(j, "grid"), m.config.grid);
  Update(Field<Json>(j, "ula"), m.config.ula);
  Update(Field<Json>(j, "sim"), m.config.sim);
  Update(Field<Json>(j, "constraints"), m.config.constraints);
  const Json records = Field<Json>(j, "records");
  if (!records.is_array()) throw Error(ErrorCode::kCorruptRecord, "manifest records must be an array");
  SplitCounts seen{0, 0, 0};
  for (const Json& rj : records) {
    m.records.push_back(RecordFromJson(rj));
    ++seen[m.records.back().split];
  }
  for (Split s : kSplits) {
    if (seen[s] != m.config.counts[s]) {
      throw Error(ErrorCode::kCorruptRecord,
                  "manifest lists " + std::to_string(seen[s]) + " " + std::string(SplitName(s)) +
                      " records but declares " + std::to_string(m.config.counts[s]));
    }
  }
  return m;
}

GeneratedSample GenerateSample(const DatasetConfig& config, const SteeringTable& steering,
                               std::uint64_t seed) {
  GeneratedSample g;
  g.sample = SampleRoom(config.constraints, seed);
  g.label = LabelsFromRoom(g.sample.room, g.sample.mic);
  const RirSet rirs = SimulateRirs(g.sample.room, g.sample.mic, config.ula, g.sample.absorption, config.sim);
  g.map = ComputeRadonMap(rirs, steering);
  return g;
}

DatasetManifest GenerateDataset(const DatasetConfig& config, const std::string& directory, int jobs,
                                const ProgressFn& progress) {
  config.Validate();
  jobs = std::max(1, jobs);
  std::filesystem::create_directories(directory);
  const SteeringTable steering(config.ula, config.grid);

  DatasetManifest manifest;
  manifest.config = config;
  manifest.directory = directory;

  for (Split split : kSplits) {
    const auto total = static_cast<std::uint32_t>(config.counts[split]);
    const std::string shard = manifest.ShardPath(split);
    const std::string tmp = shard + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp + " for writing");
    std::uint64_t offset = 0;

    // Compute a batch in parallel, then write it in index order.
    const std::uint32_t batch = static_cast<std::uint32_t>(jobs) * 4;
    for (std::uint32_t start = 0; start < total; start += batch) {
      const std::uint32_t end = std::min(total, start + batch);
      std::vector<Encoded> slots(end - start);
      std::vector<std::exception_ptr> errors(end - start);
      auto work = [&](int worker) {
        for (std::uint32_t i = start + worker; i < end; i += jobs) {
          try {
            Encoded& e = slots[i - start];
            e.generated = GenerateSample(config, steering, SampleSeed(config.base_seed, split, i));
            e.bytes = EncodeRadonMap(e.generated.map);
          } catch (...) {
            errors[i - start] = std::current_exception();
          }
        }
      };
      if (jobs == 1) {
        work(0);
      } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < jobs; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
      }

      for (std::uint32_t i = start; i < end; ++i) {
        if (errors[i - start]) Rethrow(SampleId(split, i), errors[i - start]);
        Encoded& e = slots[i - start];
        SampleRecord r;
        r.id = SampleId(split, i);
        r.split = split;
        r.index = i;
        r.seed = SampleSeed(config.base_seed, split, i);
        r.offset = offset;
        r.size = e.bytes.size();
        r.crc32 = io::Crc32(e.bytes);
        r.sample = e.generated.sample;
        r.label = e.generated.label;
        out.write(reinterpret_cast<const char*>(e.bytes.data()), static_cast<std::streamsize>(e.bytes.size()));
        if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp);
        offset += r.size;
        manifest.records.push_back(std::move(r));
        if (progress) progress(split, i + 1, total);
      }
    }
    out.close();
    std::error_code ec;
    std::filesystem::rename(tmp, shard, ec);
    if (ec) throw Error(ErrorCode::kIo, "rename to " + shard + " failed: " + ec.message());
  }

  WriteJsonFile((std::filesystem::path(directory) / kManifestName).string(), ManifestToJson(manifest));
  return manifest;
}

DatasetManifest LoadManifest(const std::string& directory) {
  DatasetManifest m = ManifestFromJson(ReadJsonFile((std::filesystem::path(directory) / kManifestName).string()));
  m.directory = directory;
  return m;
}

Sample ReadSample(const DatasetManifest& manifest, std::string_view id) {
  const SampleRecord& r = manifest.Find(id);
  const io::Bytes bytes = io::ReadFileRange(manifest.ShardPath(r.split), r.offset, r.size);
  if (io::Crc32(bytes) != r.crc32) {
    throw Error(ErrorCode::kCorruptRecord, "checksum mismatch for sample " + r.id);
  }
  return {DecodeRadonMap(bytes), r.label};
}

double ComputeLoss(const LabelVector& pred, const LabelVector& truth) {
  double sum = (pred.mic - truth.mic).norm();
  for (int i = 0; i < kNumSideWalls; ++i) {
    const WallId id = static_cast<WallId>(i);
    sum += (pred.side(id) - truth.side(id)).norm();
  }
  sum += std::abs(pred.floor_z - truth.floor_z);
  sum += std::abs(pred.ceiling_z - truth.ceiling_z);
  return sum / 7.0;
}

}  // namespace rgi
