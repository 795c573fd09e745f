#pragma once

#include <cstdint>
#include <string>

namespace vidseg {

// FNV-1a, used for config/artifact fingerprints in manifests.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(uint64_t v);

// splitmix64 integer mixer. Drives deterministic start vectors and test data
// without any stateful RNG.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Maps a mixed 64-bit word to [0,1).
inline double unit_from_bits(uint64_t bits) {
  return double(bits >> 11) * 0x1.0p-53;
}

namespace entropy {
// The library never draws nondeterministic entropy; the CLI --seedless flag
// asserts that stays true.
bool any_used();
void note_used();
}  // namespace entropy

}  // namespace vidseg
