#pragma once

#include <cstdint>

namespace vesselseg {

// Splitmix64 generator. Hand-rolled so that seeded runs are byte-identical
// across standard libraries and build configurations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  float next_float() { return static_cast<float>(next_double()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // inclusive range
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  bool chance(double p) { return next_double() < p; }

 private:
  uint64_t state_;
};

// Stateless mixing hash for procedural textures.
inline uint64_t hash_mix(uint64_t a, uint64_t b) {
  uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x7f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double hash_unit(uint64_t a, uint64_t b) {
  return static_cast<double>(hash_mix(a, b) >> 11) * 0x1.0p-53;
}

}  // namespace vesselseg
