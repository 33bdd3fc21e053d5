#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace fhj {

// Counter-based random numbers: every draw is a pure function of
// (key, counter), so realizations are reproducible and independent of
// evaluation order or thread count. Keys are derived by hashing a master
// seed with a stream tag and a realization index; adding realizations
// never perturbs existing ones.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (0x9E3779B97F4A7C15ull + b + (a << 6) + (a >> 2)));
}

inline uint64_t hash_tag(std::string_view tag) {
  uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

inline uint64_t derive_key(uint64_t master_seed, std::string_view stream,
                           uint64_t index) {
  return hash_combine(hash_combine(master_seed, hash_tag(stream)), index);
}

class CounterRng {
 public:
  explicit CounterRng(uint64_t key, uint64_t counter = 0)
      : key_(key), ctr_(counter) {}
  CounterRng(uint64_t master_seed, std::string_view stream, uint64_t index)
      : key_(derive_key(master_seed, stream, index)), ctr_(0) {}

  uint64_t next_u64() { return splitmix64(key_ ^ (0xD1B54A32D192ED03ull * ++ctr_)); }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in [0, 2*pi)
  double next_phase() { return 2.0 * std::numbers::pi * next_double(); }

  // standard normal via Box-Muller; consumes exactly two counters per draw
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    // guard against log(0)
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  uint64_t counter() const { return ctr_; }

 private:
  uint64_t key_;
  uint64_t ctr_;
};

}  // namespace fhj
