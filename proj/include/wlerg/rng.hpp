#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace wlerg {

// Counter-based randomness: every draw is a pure function of (key, counter),
// so results never depend on evaluation order or thread count.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash2(std::uint64_t seed, std::uint64_t a) {
  return hash_combine(splitmix64(seed), a);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return hash_combine(hash_combine(splitmix64(seed), a), b);
}

// Uniform in [0,1) with 53 random mantissa bits.
inline double u64_to_unit(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// Labeled sub-seed derivation: one --seed knob, independent streams per purpose.
inline std::uint64_t seed_from_label(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return hash_combine(splitmix64(seed), h);
}

// Sequential stream on top of the counter hash, for draws that have no
// natural (i,j) identity (Monte Carlo loops, Gaussian sampling, subsampling).
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return hash2(key_, counter_++); }

  double next_unit() { return u64_to_unit(next_u64()); }

  // Open (0,1): zero draws are rejected and redrawn.
  double next_open_unit() {
    double u = next_unit();
    while (u <= 0.0) u = next_unit();
    return u;
  }

  double next_gaussian() {
    // Box-Muller; one value per pair of uniforms keeps the stream stateless
    // apart from the counter.
    double u1 = next_open_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Uniform integer in [0, bound) by rejection (bound > 0).
  std::uint64_t next_below(std::uint64_t bound) {
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % bound;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace wlerg
