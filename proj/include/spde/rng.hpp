#pragma once

#include <cstdint>

namespace spde::rng {

/// Independent sub-streams of the counter-based generator.
enum class Stream : std::uint32_t {
  brownian = 0,
  exact_gauss = 1,
  initial = 2,
  auxiliary = 3,
};

/// splitmix64 finaliser.
std::uint64_t mix(std::uint64_t x);

/// Counter-based uniform on (0,1), a pure function of its key.
double uniform(std::uint64_t seed, std::uint64_t path, Stream stream, std::uint32_t level,
               std::uint64_t index);

/// Standard normal by inverse CDF of uniform().
double normal(std::uint64_t seed, std::uint64_t path, Stream stream, std::uint32_t level,
              std::uint64_t index);

}  // namespace spde::rng
