#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rgi {

/// Surfaces of a separable room, in label/report order.
enum class WallId { kBack = 0, kRight, kFront, kLeft, kFloor, kCeiling };

inline constexpr int kNumSideWalls = 4;
inline constexpr int kNumWalls = 6;

std::string_view WallName(WallId id);

enum class ErrorCode {
  kDegenerateImage,
  kInvalidRadii,
  kMicOutsideRoom,
  kSourceOutsideRoom,
  kSamplingExhausted,
  kGridMismatch,
  kMissingDirectPath,
  kMissingWallPeak,
  kNotFound,
  kCorruptRecord,
  kNonUnitNormal,
  kEmptyInput,
  kInvalidArgument,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<WallId> wall = std::nullopt)
      : std::runtime_error(message), code_(code), wall_(wall) {}

  ErrorCode code() const { return code_; }
  std::optional<WallId> wall() const { return wall_; }

 private:
  ErrorCode code_;
  std::optional<WallId> wall_;
};

}  // namespace rgi
