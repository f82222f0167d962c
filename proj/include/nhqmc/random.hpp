#pragma once

#include <cstdint>
#include <random>

namespace nhqmc {

using Rng = std::mt19937_64;

/// Stream identifiers used to key independent draw loops.
enum class StreamId : std::uint64_t {
  numerator = 1,
  denominator = 2,
  amplitude = 3,
  validation = 4,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic per-draw generator keyed by (master seed, stream, draw index).
/// Results never depend on which worker consumes the draw.
Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id,
                std::uint64_t draw_index);

inline Rng make_stream(std::uint64_t master_seed, StreamId stream,
                       std::uint64_t draw_index) {
  return make_stream(master_seed, static_cast<std::uint64_t>(stream),
                     draw_index);
}

}  // namespace nhqmc
