#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace asmnn {

// std::mt19937 produces a standard-mandated sequence, but the std::
// distributions are implementation-defined, so the mappings below are
// spelled out by hand. Everything derived from a seed is then identical
// across compilers and standard libraries.
using Rng = std::mt19937;

// Unbiased integer in [0, n) via rejection sampling.
inline std::uint32_t bounded_uint(Rng& rng, std::uint32_t n) {
  const std::uint64_t span = 0x100000000ull;
  const std::uint64_t limit = span - span % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::uint32_t>(r % n);
}

inline double uniform01(Rng& rng) {
  return rng() * (1.0 / 4294967296.0);  // [0, 1)
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Irwin-Hall sum of 12 uniforms: close enough to N(0,1) for data
// synthesis and free of libm, so bit-stable everywhere.
inline double gaussian(Rng& rng) {
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += uniform01(rng);
  return s - 6.0;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded_uint(rng, static_cast<std::uint32_t>(i))]);
  }
}

}  // namespace asmnn
