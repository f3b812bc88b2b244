#pragma once

#include <cstdint>

namespace homeolab {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_words(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ULL);
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x3C6EF372FE94F82BULL));
  h = mix64(h ^ (c + 0xA54FF53A5F1D36F1ULL));
  return h;
}

// Maps 64 random bits to the open interval (0, 1).
constexpr double bits_to_open01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Counter-based uniform stream: every draw is a pure function of
/// (seed, a, b, c), so draws can be addressed directly (for instance by
/// a dyadic point) without consuming a sequential generator.
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return bits_to_open01(hash_words(seed, a, b, c));
}

/// Small sequential generator for places that just need a stream of draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return bits_to_open01(next()); }
  bool coin() { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

}  // namespace homeolab
