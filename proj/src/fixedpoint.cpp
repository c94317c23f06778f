#include "asmnn/fixedpoint.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace asmnn {

std::int64_t round_half_even(double x) {
  const double floor_x = std::floor(x);
  const double frac = x - floor_x;
  auto lo = static_cast<std::int64_t>(floor_x);
  if (frac > 0.5) return lo + 1;
  if (frac < 0.5) return lo;
  return (lo % 2 == 0) ? lo : lo + 1;
}

FixedPoint quantize(double x, QFormat fmt) {
  if (!fmt.valid()) throw std::invalid_argument("invalid QFormat");
  const double scaled =
      x * static_cast<double>(std::int64_t{1} << fmt.fraction_bits);
  std::int64_t raw = round_half_even(scaled);
  if (raw > fmt.max_raw()) raw = fmt.max_raw();
  if (raw < fmt.min_raw()) raw = fmt.min_raw();
  return FixedPoint{static_cast<std::int32_t>(raw), fmt};
}

double dequantize(FixedPoint v) {
  return static_cast<double>(v.raw) /
         static_cast<double>(std::int64_t{1} << v.format.fraction_bits);
}

std::int64_t exact_multiply(FixedPoint t, FixedPoint w) {
  return static_cast<std::int64_t>(t.raw) * static_cast<std::int64_t>(w.raw);
}

std::int32_t saturate32(std::int64_t v) {
  if (v > std::numeric_limits<std::int32_t>::max())
    return std::numeric_limits<std::int32_t>::max();
  if (v < std::numeric_limits<std::int32_t>::min())
    return std::numeric_limits<std::int32_t>::min();
  return static_cast<std::int32_t>(v);
}

}  // namespace asmnn
