#pragma once

// Supervised corpus of (normalized Radon map, label vector) pairs.
//
// On disk a dataset directory holds manifest.json plus one shard per split
// (train.bin, val.bin, test.bin). A shard is the concatenation of encoded
// Radon maps; the manifest records each map's offset, size and CRC32.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rgi/geometry.hpp"
#include "rgi/radon.hpp"
#include "rgi/serialize.hpp"
#include "rgi/simulator.hpp"

namespace rgi {

enum class Split { kTrain = 0, kVal, kTest };
inline constexpr int kNumSplits = 3;

std::string_view SplitName(Split split);
/// Throws InvalidArgument for names other than train/val/test.
Split ParseSplit(std::string_view name);

struct SplitCounts {
  int train = 500;
  int val = 100;
  int test = 100;

  int& operator[](Split s);
  int operator[](Split s) const;

  static SplitCounts Desk() { return {500, 100, 100}; }
  static SplitCounts Paper() { return {50000, 5000, 5000}; }
};

/// Seed of one sample. Splits occupy disjoint 2^32-wide seed ranges above
/// the base seed.
std::uint64_t SampleSeed(std::uint64_t base_seed, Split split, std::uint32_t index);

/// e.g. "val-000042".
std::string SampleId(Split split, std::uint32_t index);

struct DatasetConfig {
  SplitCounts counts;
  RoomConstraints constraints;
  UlaConfig ula;
  SimParams sim;
  RadonGrid grid;
  std::uint64_t base_seed = 0;

  void Validate() const;
};

struct SampleRecord {
  std::string id;
  Split split = Split::kTrain;
  std::uint32_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t offset = 0;  // bytes into the split shard
  std::uint64_t size = 0;
  std::uint32_t crc32 = 0;
  SampledRoom sample;
  LabelVector label;
};

struct DatasetManifest {
  static constexpr int kVersion = 1;

  int version = kVersion;
  DatasetConfig config;
  std::vector<SampleRecord> records;  // split order, then index order
  std::string directory;              // where the manifest was loaded from

  /// Throws NotFound.
  const SampleRecord& Find(std::string_view id) const;
  std::vector<const SampleRecord*> SplitRecords(Split split) const;
  std::string ShardPath(Split split) const;
};

Json ManifestToJson(const DatasetManifest& manifest);
/// Checks record counts against the declared split counts.
DatasetManifest ManifestFromJson(const Json& j);

/// The full per-sample pipeline: sample, simulate, Radon map (normalized).
struct GeneratedSample {
  SampledRoom sample;
  LabelVector label;
  RadonMap map;
};
GeneratedSample GenerateSample(const DatasetConfig& config, const SteeringTable& steering,
                               std::uint64_t seed);

using ProgressFn = std::function<void(Split, std::uint32_t done, std::uint32_t total)>;

/// Writes shards and manifest.json into `directory` (created if needed).
/// Samples are computed on up to `jobs` threads and written in index order
/// by one writer, so the output does not depend on `jobs`. A failing sample
/// rethrows its error with the sample id prepended.
DatasetManifest GenerateDataset(const DatasetConfig& config, const std::string& directory,
                                int jobs = 1, const ProgressFn& progress = {});

/// Reads `directory`/manifest.json.
DatasetManifest LoadManifest(const std::string& directory);

struct Sample {
  RadonMap map;
  LabelVector label;
};

/// Throws NotFound for unknown ids and CorruptRecord on truncation or a CRC
/// mismatch.
Sample ReadSample(const DatasetManifest& manifest, std::string_view id);

/// Mean over the seven surfaces of the Euclidean xy error (mic and side
/// walls) and the absolute z error (floor, ceiling).
double ComputeLoss(const LabelVector& pred, const LabelVector& truth);

}  // namespace rgi
