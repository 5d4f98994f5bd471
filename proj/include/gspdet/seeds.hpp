#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace gspdet {

// Stable, platform-independent seed derivation. Experiments fan out one
// master seed into per-trial seeds; the mapping must not depend on grid
// layout or execution order, so everything is hashed by value.

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t seed_combine(std::uint64_t acc, std::uint64_t part) {
  return splitmix64(acc ^ splitmix64(part));
}

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t acc = splitmix64(base);
  for (std::uint64_t p : parts) acc = seed_combine(acc, p);
  return acc;
}

inline std::uint64_t hash_bits(double value) {
  // -0.0 and 0.0 hash alike so that equal grid values share trial streams.
  if (value == 0.0) value = 0.0;
  return std::bit_cast<std::uint64_t>(value);
}

inline std::uint64_t hash_label(std::string_view text) {
  std::uint64_t acc = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    acc ^= c;
    acc *= 0x100000001b3ULL;
  }
  return acc;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

}  // namespace gspdet
