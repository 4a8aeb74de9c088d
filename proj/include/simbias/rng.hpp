#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace simbias {

/// Independent random streams. Each stream derives its own seed so trials can
/// run in any order without shared generator state.
enum class Stream : std::uint64_t {
  Network = 1,
  Input = 2,
  Walk = 3,
  GpOracle = 4,
  Synthetic = 5,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// child = mix(seed, stream, keys...). Distinct key tuples give decorrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(stream)));
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, Stream stream,
                          std::initializer_list<std::uint64_t> keys) {
  return Engine(derive_seed(seed, stream, keys));
}

}  // namespace simbias
