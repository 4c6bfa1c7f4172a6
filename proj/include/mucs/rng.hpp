#ifndef MUCS_RNG_HPP
#define MUCS_RNG_HPP

// Seeded random streams.
//
// Each independent quantity of an experiment (true matrix, matrix noise,
// measurement noise, signal) draws from its own std::mt19937_64 substream.
// The substream seed is splitmix64(seed ^ (tag * 0x9E3779B97F4A7C15)), so
// adding a stream never perturbs the others. Normal deviates use Boost's
// ziggurat sampler, which is the same algorithm on every platform.

#include <cstdint>
#include <random>

namespace mucs::rng {

enum class Stream : std::uint64_t {
  TrueMatrix = 1,
  MatrixNoise = 2,
  MeasurementNoise = 3,
  Signal = 4,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(seed ^ (static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ULL));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
  return std::mt19937_64(substream_seed(seed, stream));
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace mucs::rng

#endif
