#pragma once

#include <cstdint>

namespace asmnn {

// Fixed-point layout: word size, binary point position, signedness.
// Raw values scale by 2^-fraction_bits.
struct QFormat {
  int total_bits = 8;
  int fraction_bits = 0;
  bool is_signed = true;

  bool valid() const {
    if (total_bits < 1 || total_bits > 16) return false;
    const int integer_span = total_bits - (is_signed ? 1 : 0);
    return fraction_bits >= 0 && fraction_bits <= integer_span;
  }

  // The signed minimum -2^(n-1) is excluded so that every representable
  // value has a representable absolute value.
  std::int32_t max_raw() const {
    return is_signed ? (std::int32_t{1} << (total_bits - 1)) - 1
                     : (std::int32_t{1} << total_bits) - 1;
  }
  std::int32_t min_raw() const { return is_signed ? -max_raw() : 0; }

  double resolution() const {
    return 1.0 / static_cast<double>(std::int64_t{1} << fraction_bits);
  }

  bool operator==(const QFormat&) const = default;
};

// Default weight layout: Q1.(n-2), values in (-2, 2).
inline QFormat weight_format(int bits) { return QFormat{bits, bits - 2, true}; }

// Default input/activation layout: unsigned Q0.8, values in [0, 1).
inline QFormat input_format() { return QFormat{8, 8, false}; }

struct FixedPoint {
  std::int32_t raw = 0;
  QFormat format;
};

// Round-to-nearest-even of x * 2^fraction_bits, saturated to the
// representable range. Saturation is silent; this never fails.
FixedPoint quantize(double x, QFormat fmt);

double dequantize(FixedPoint v);

// Full-precision product of the raw operands; no truncation. This is the
// conventional-multiplier baseline every shift-add path is checked against.
std::int64_t exact_multiply(FixedPoint t, FixedPoint w);

std::int32_t saturate32(std::int64_t v);

// Dot-product accumulator: 32-bit signed, saturating instead of wrapping.
struct Accumulator {
  std::int32_t raw = 0;

  void add(std::int64_t value) {
    raw = saturate32(static_cast<std::int64_t>(raw) + value);
  }
};

// Shared rounding helper (round half to even), independent of the
// floating-point environment.
std::int64_t round_half_even(double x);

}  // namespace asmnn
