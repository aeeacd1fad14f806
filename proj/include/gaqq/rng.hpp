#pragma once

#include <cmath>
#include <cstdint>

namespace gaqq {

// splitmix64 finalizer (Steele, Lea & Flood 2014; constants from Vigna's
// reference implementation).
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based 64-bit generator: state advances by the golden-ratio gamma and
// each output is the splitmix64 finalizer of the new state. Streams for
// independent work items are derived with derive_stream, never by jumping.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; used where log(u) must stay finite.
  double next_uniform_open() { return 1.0 - next_uniform(); }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  bool next_bernoulli(double prob) { return next_uniform() < prob; }

  // Exactly one Box-Muller evaluation per call: two uniforms in, the cosine
  // branch out. Deterministic stream layout, no cached second variate.
  double next_normal() {
    const double u1 = next_uniform_open();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Integer in [0, n) via the multiply-shift map of a full 64-bit draw.
  int next_below(int n) {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<int>(prod >> 64);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  uint64_t state_;
};

// Combines a user seed, a scenario fingerprint and a replication index into an
// independent stream seed: three chained splitmix64 finalizer applications.
inline uint64_t derive_stream(uint64_t seed, uint64_t scenario_hash, uint64_t rep_index) {
  uint64_t h = mix64(seed);
  h = mix64(h ^ scenario_hash);
  h = mix64(h ^ rep_index);
  return h;
}

}  // namespace gaqq
