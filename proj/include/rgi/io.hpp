#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rgi::io {

using Bytes = std::vector<std::uint8_t>;

void PutU32(Bytes& out, std::uint32_t v);
void PutI32(Bytes& out, std::int32_t v);
void PutF32(Bytes& out, float v);

std::uint32_t GetU32(std::span<const std::uint8_t> in, std::size_t offset);
std::int32_t GetI32(std::span<const std::uint8_t> in, std::size_t offset);
float GetF32(std::span<const std::uint8_t> in, std::size_t offset);

std::uint32_t Crc32(std::span<const std::uint8_t> data);

/// Writes to a sibling temp file, then renames over `path`.
void WriteFileAtomic(const std::string& path, std::span<const std::uint8_t> data);
void WriteFileAtomic(const std::string& path, const std::string& text);

Bytes ReadFile(const std::string& path);
std::string ReadTextFile(const std::string& path);

/// Reads `size` bytes at `offset`; short reads throw CorruptRecord.
Bytes ReadFileRange(const std::string& path, std::uint64_t offset, std::uint64_t size);

}  // namespace rgi::io
