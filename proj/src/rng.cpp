#include "spde/rng.hpp"

#include "spde/special.hpp"

namespace spde::rng {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform(std::uint64_t seed, std::uint64_t path, Stream stream, std::uint32_t level,
               std::uint64_t index) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ path);
  h = mix(h ^ ((static_cast<std::uint64_t>(stream) << 32) | level));
  h = mix(h ^ index);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double normal(std::uint64_t seed, std::uint64_t path, Stream stream, std::uint32_t level,
              std::uint64_t index) {
  return special::normal_quantile(uniform(seed, path, stream, level, index));
}

}  // namespace spde::rng
