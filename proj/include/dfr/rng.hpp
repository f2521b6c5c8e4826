#pragma once

#include <cstdint>
#include <random>

namespace dfr {

// Maps raw 64-bit draws to doubles ourselves: std::uniform_real_distribution
// is not pinned by the standard, mt19937_64 is. Keeps streams identical
// across compilers.
inline double u64_to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0, 1)
}

class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double unit() { return u64_to_unit(gen_()); }  // [0, 1)

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  double sign() { return (gen_() >> 63) ? 1.0 : -1.0; }  // +1 or -1

private:
  std::mt19937_64 gen_;
};

}  // namespace dfr
