#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "vesselseg/network.hpp"

namespace vesselseg {

// Binary weight file: "VNET" magic, u32 format version, a length-prefixed
// key=value text header carrying the NetworkSpec and training metadata, then
// the parameter blocks in declaration order (u32 name length, name, u32 rank,
// u32 dims, f32 little-endian values). save(load(x)) is byte-identical.
inline constexpr uint32_t kCheckpointVersion = 1;

enum class CheckpointErrorCode {
  kBadMagic,
  kBadVersion,
  kShapeMismatch,
  kTruncated,
  kParse,
  kIo,
};

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  CheckpointErrorCode code() const { return code_; }

 private:
  CheckpointErrorCode code_;
};

struct CheckpointMeta {
  uint64_t seed = 0;
  int64_t steps = 0;
  double final_loss = 0.0;

  bool operator==(const CheckpointMeta&) const = default;
};

struct LoadedCheckpoint {
  Network net;
  CheckpointMeta meta;
};

void save_checkpoint(const Network& net, const CheckpointMeta& meta, const std::string& path);
LoadedCheckpoint load_checkpoint(const std::string& path);
// Rejects files whose architecture differs from `expected`.
LoadedCheckpoint load_checkpoint(const std::string& path, const NetworkSpec& expected);

// Process-wide count of successful checkpoint loads; lets tests assert that a
// code path trained from scratch instead of reading weights from disk.
std::size_t checkpoint_load_count();

}  // namespace vesselseg
