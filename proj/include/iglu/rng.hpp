#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace iglu {

/// Stable 64-bit seed derivation: FNV-1a over the tags, mixed with splitmix64.
/// Used so per-episode randomness depends only on (seed, episode id, purpose).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::string_view> tags) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ base;
  for (auto tag : tags) {
    for (unsigned char ch : tag) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  }
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace iglu
