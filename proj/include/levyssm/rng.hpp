#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace levyssm {

using Rng = std::mt19937_64;

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Named substream derived from (global seed, stream name). Toggling the draws
// of one component must not perturb another component's draws, so each
// component gets its own generator.
inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  const std::uint64_t tag = fnv1a64(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag),
                    static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

}  // namespace levyssm
