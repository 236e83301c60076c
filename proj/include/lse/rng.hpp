#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lse {

using Rng = std::mt19937_64;

// FNV-1a over the stream name.
constexpr std::uint64_t stream_id(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Independent generator derived from a base seed and a stream name
// ("init", "sampling", "shuffle", ...). Changing how many draws one stream
// consumes never perturbs another.
inline Rng make_stream(std::uint64_t seed, std::string_view name) {
  const std::uint64_t id = stream_id(name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return Rng(seq);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

}  // namespace lse
