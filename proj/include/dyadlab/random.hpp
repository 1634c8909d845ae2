#pragma once

#include <cstdint>

namespace dyadlab {

// Counter-based generator: draw i of stream s under seed is a pure function
// of (seed, s, i), so batch element s produces the same numbers whatever
// thread runs it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x243F6A8885A308D3ull))) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }
  // uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // uniform on [lo, hi]
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }
  bool coin() { return (next_u64() >> 63) != 0; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dyadlab
