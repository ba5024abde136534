#ifndef AIRTAPER_RNG_HPP
#define AIRTAPER_RNG_HPP

#include <cmath>
#include <cstdint>

#include "airtaper/core.hpp"

namespace airtaper {

/// Counter-based generator (splitmix64 finalizer over an incrementing
/// counter). Streams derived from (seed, key) are independent, so parallel
/// workers cannot change results by reordering.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0)
      : base_(mix(seed ^ mix(stream ^ 0x9e3779b97f4a7c15ull))), counter_(0) {}

  static CounterRng for_stream(uint64_t seed, uint64_t a, uint64_t b = 0) {
    return CounterRng(seed, mix(a + 0x632be59bd9b4e019ull * (b + 1)));
  }

  uint64_t next_u64() { return mix(base_ + 0x9e3779b97f4a7c15ull * (++counter_)); }

  /// uniform in (0, 1): never returns 0, safe for log()
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform(), u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t base_;
  uint64_t counter_;
  double spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace airtaper

#endif
