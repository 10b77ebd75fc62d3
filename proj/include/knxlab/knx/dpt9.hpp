#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "knxlab/knx/errors.hpp"

namespace knxlab::knx {

// KNX 16-bit float (DPT9): S(1) E(4) M(11) where {S,M} form a 12-bit
// two's-complement mantissa and value = 0.01 * M * 2^E. Code 0x7fff is the
// reserved invalid-data marker.
inline constexpr std::uint16_t kDpt9Invalid = 0x7FFF;

inline double decode_dpt9_code(std::uint16_t code) {
  if (code == kDpt9Invalid) throw OutOfRange("invalid DPT9 code");
  const int exponent = (code >> 11) & 0x0F;
  int mantissa = code & 0x07FF;
  if (code & 0x8000) mantissa -= 2048;
  return 0.01 * static_cast<double>(mantissa) * std::ldexp(1.0, exponent);
}

// Canonical encoding: the smallest exponent whose rounded mantissa fits.
inline std::uint16_t encode_dpt9_code(double value) {
  if (!std::isfinite(value)) throw OutOfRange("non-finite DPT9 value");
  const double scaled = value * 100.0;
  for (int exponent = 0; exponent <= 15; ++exponent) {
    const double m = scaled / std::ldexp(1.0, exponent);
    const long long rounded = std::llround(m);
    if (rounded < -2048 || rounded > 2047) continue;
    const std::uint16_t code = static_cast<std::uint16_t>(
        ((rounded < 0 ? 1 : 0) << 15) | (exponent << 11) |
        (static_cast<unsigned>(rounded) & 0x07FF));
    if (code == kDpt9Invalid)
      throw OutOfRange("DPT9 value maps to the reserved invalid code");
    return code;
  }
  throw OutOfRange("DPT9 value out of range");
}

inline std::array<std::uint8_t, 2> encode_dpt9(double value) {
  const std::uint16_t code = encode_dpt9_code(value);
  return {static_cast<std::uint8_t>(code >> 8),
          static_cast<std::uint8_t>(code & 0xFF)};
}

inline double decode_dpt9(std::uint8_t hi, std::uint8_t lo) {
  return decode_dpt9_code(static_cast<std::uint16_t>(hi << 8 | lo));
}

}  // namespace knxlab::knx
