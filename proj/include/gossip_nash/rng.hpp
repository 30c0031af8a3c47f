#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace gossip_nash {

/// Stream ids. Each stream is an std::mt19937_64 seeded from
/// std::seed_seq{seed_lo32, seed_hi32, stream_id}; both are fully specified
/// by the standard, so sequences are identical across platforms.
enum class Stream : std::uint32_t { wake = 1, neighbor = 2 };

inline std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

/// Uniform draw from {0, ..., n-1} by rejection, independent of the standard
/// library's distribution implementation.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: empty range");
  constexpr std::uint64_t top = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = top - (top % n + 1) % n;  // largest multiple of n, minus one
  for (;;) {
    const std::uint64_t v = rng();
    if (v <= limit) return v % n;
  }
}

/// The two random sources of the gossip scheduler.
struct SchedulerRng {
  std::mt19937_64 wake;
  std::mt19937_64 neighbor;

  explicit SchedulerRng(std::uint64_t seed = 0)
      : wake(make_stream(seed, Stream::wake)), neighbor(make_stream(seed, Stream::neighbor)) {}

  friend bool operator==(const SchedulerRng&, const SchedulerRng&) = default;
};

}  // namespace gossip_nash
