#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tfk {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent generator for the named substream `tag` of `seed`, item `index`.
/// Generators for different (tag, index) pairs do not depend on draw order.
inline Rng substream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  std::uint64_t s = splitmix64(seed ^ splitmix64(hash_tag(tag)));
  s = splitmix64(s ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return Rng(s);
}

}  // namespace tfk
