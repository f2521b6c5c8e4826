#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "dfr/errors.hpp"

namespace dfr {

enum class Rounding { Truncate, RoundNearestEven };
enum class Overflow { Saturate, Wrap };

// Signed two's-complement fixed point: value = raw * 2^(-frac_bits).
struct QFormat {
  int total_bits = 16;
  int frac_bits = 12;
  Rounding rounding = Rounding::RoundNearestEven;
  Overflow overflow = Overflow::Saturate;

  void validate() const {
    if (total_bits < 2 || total_bits > 64)
      throw invalid_parameter("QFormat: total_bits must be in [2, 64]");
    if (frac_bits < 0 || frac_bits > total_bits - 1)
      throw invalid_parameter("QFormat: frac_bits must be in [0, total_bits-1]");
  }

  std::int64_t max_raw() const {
    return static_cast<std::int64_t>((static_cast<__int128>(1) << (total_bits - 1)) - 1);
  }
  std::int64_t min_raw() const {
    return static_cast<std::int64_t>(-(static_cast<__int128>(1) << (total_bits - 1)));
  }
  double ulp() const { return std::ldexp(1.0, -frac_bits); }
  double max_value() const { return std::ldexp(static_cast<double>(max_raw()), -frac_bits); }
  double min_value() const { return std::ldexp(static_cast<double>(min_raw()), -frac_bits); }

  bool operator==(const QFormat&) const = default;
};

struct FixedVal {
  std::int64_t raw = 0;
  QFormat fmt;

  double to_real() const { return std::ldexp(static_cast<double>(raw), -fmt.frac_bits); }
};

namespace detail {

using int128 = __int128;

// v / 2^shift with the given rounding. Arithmetic shift == floor.
inline int128 round_shift(int128 v, int shift, Rounding rounding) {
  if (shift <= 0) return v;
  int128 q = v >> shift;
  if (rounding == Rounding::Truncate) return q;
  const int128 rem = v - (q << shift);  // in [0, 2^shift)
  const int128 half = int128(1) << (shift - 1);
  if (rem > half)
    ++q;
  else if (rem == half)
    q += (q & 1);  // tie: round to even
  return q;
}

inline std::int64_t handle_overflow(int128 raw, const QFormat& fmt) {
  const int128 lo = -(int128(1) << (fmt.total_bits - 1));
  const int128 hi = (int128(1) << (fmt.total_bits - 1)) - 1;
  if (raw >= lo && raw <= hi) return static_cast<std::int64_t>(raw);
  if (fmt.overflow == Overflow::Saturate)
    return static_cast<std::int64_t>(raw < lo ? lo : hi);
  // two's-complement wraparound modulo 2^total_bits
  const int128 span = int128(1) << fmt.total_bits;
  int128 r = ((raw % span) + span) % span;
  if (r > hi) r -= span;
  return static_cast<std::int64_t>(r);
}

}  // namespace detail

// Nearest representable per the format's rounding mode; out-of-range values
// handled per the overflow mode.
inline FixedVal quantize(double x, const QFormat& fmt) {
  fmt.validate();
  if (!std::isfinite(x)) throw invalid_parameter("quantize: x must be finite");
  const double v = std::ldexp(x, fmt.frac_bits);  // exact: scaling by 2^k
  double r = std::floor(v);
  if (fmt.rounding == Rounding::RoundNearestEven) {
    const double frac = v - r;  // exact
    if (frac > 0.5)
      r += 1.0;
    else if (frac == 0.5 && std::fmod(r, 2.0) != 0.0)
      r += 1.0;
  }
  // doubles beyond +-2^96 are far outside any 64-bit format; pin them so the
  // int128 conversion below stays defined
  const double limit = std::ldexp(1.0, 96);
  if (r > limit) r = limit;
  if (r < -limit) r = -limit;
  return {detail::handle_overflow(static_cast<detail::int128>(r), fmt), fmt};
}

inline FixedVal fx_add(const FixedVal& a, const FixedVal& b) {
  if (!(a.fmt == b.fmt)) throw invalid_parameter("fx_add: format mismatch");
  const detail::int128 sum = static_cast<detail::int128>(a.raw) + b.raw;
  return {detail::handle_overflow(sum, a.fmt), a.fmt};
}

inline FixedVal fx_sub(const FixedVal& a, const FixedVal& b) {
  if (!(a.fmt == b.fmt)) throw invalid_parameter("fx_sub: format mismatch");
  const detail::int128 diff = static_cast<detail::int128>(a.raw) - b.raw;
  return {detail::handle_overflow(diff, a.fmt), a.fmt};
}

// Exact double-width product, then shift down by frac_bits with the format's
// rounding, then overflow handling. Integer-only: no host float involved.
inline FixedVal fx_mul(const FixedVal& a, const FixedVal& b) {
  if (!(a.fmt == b.fmt)) throw invalid_parameter("fx_mul: format mismatch");
  const detail::int128 prod = static_cast<detail::int128>(a.raw) * b.raw;
  const detail::int128 shifted = detail::round_shift(prod, a.fmt.frac_bits, a.fmt.rounding);
  return {detail::handle_overflow(shifted, a.fmt), a.fmt};
}

// Re-represent in another format. Widening the fraction is exact; narrowing
// rounds per the destination's mode.
inline FixedVal requantize(const FixedVal& v, const QFormat& dst) {
  dst.validate();
  const int diff = dst.frac_bits - v.fmt.frac_bits;
  detail::int128 raw = v.raw;
  if (diff >= 0)
    raw <<= diff;
  else
    raw = detail::round_shift(raw, -diff, dst.rounding);
  return {detail::handle_overflow(raw, dst), dst};
}

inline const char* to_string(Rounding r) {
  return r == Rounding::Truncate ? "truncate" : "rne";
}
inline const char* to_string(Overflow o) {
  return o == Overflow::Saturate ? "saturate" : "wrap";
}

}  // namespace dfr
