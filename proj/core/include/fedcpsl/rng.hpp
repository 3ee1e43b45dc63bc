#pragma once

#include <cstdint>
#include <random>

namespace fedcpsl {

using Rng = std::mt19937_64;

/// Independent stream purposes. Streams for different purposes never share
/// a seed even when the remaining coordinates coincide.
enum class StreamKind : std::uint64_t {
  model_init = 1,
  participants = 2,
  local_plan = 3,
  batches = 4,
  partition = 5,
  split = 6,
  blobs = 7,
};

/// Derive a stream seed from the master seed and (kind, a, b) coordinates,
/// so per-client randomness never depends on the order clients run in.
std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t a = 0,
                          std::uint64_t b = 0);

inline Rng make_stream(std::uint64_t master, StreamKind kind, std::uint64_t a = 0,
                       std::uint64_t b = 0) {
  return Rng(derive_seed(master, kind, a, b));
}

}  // namespace fedcpsl
