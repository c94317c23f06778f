#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "asmnn/fixedpoint.hpp"

namespace asmnn {

// The ordered set of odd multiples a pre-computer bank provides, together
// with the bit width of the weight groups it serves. The sign-adjacent MSB
// group is 3 bits wide; all others are 4.
class AlphabetSet {
 public:
  AlphabetSet() : AlphabetSet({1}, 4) {}
  AlphabetSet(std::initializer_list<int> alphabets, int group_bits = 4);
  AlphabetSet(std::vector<int> alphabets, int group_bits = 4);

  static AlphabetSet full(int group_bits = 4);  // {1,3,5,7,9,11,13,15}
  // Canonical nested ladder: {1}, {1,3}, {1,3,5,7}, full.
  static AlphabetSet of_size(int n_alphabets, int group_bits = 4);

  const std::vector<int>& alphabets() const { return alphabets_; }
  int group_bits() const { return group_bits_; }
  int size() const { return static_cast<int>(alphabets_.size()); }

  // Same set narrowed to a smaller group width; alphabets that no longer
  // fit are dropped (used for the 3-bit MSB group).
  AlphabetSet restricted_to(int group_bits) const;

  std::string name() const;  // "{1,3,5,7}"

  bool operator==(const AlphabetSet&) const = default;

 private:
  std::vector<int> alphabets_;
  int group_bits_;
};

// A weight magnitude split into 4-bit quartets with a 3-bit MSB group,
// plus the sign that was peeled off first.
struct Quartets {
  int sign = 1;            // +1 or -1
  std::vector<int> groups; // MSB first: [P, R] for 8 bit, [P, Q, R] for 12
  int source_bits = 8;

  std::int32_t reassemble() const;
};

// Splits a signed weight into sign and bit groups. Requires
// (total_bits - 1) % 4 == 3, i.e. 8- or 12-bit style layouts.
Quartets decompose(FixedPoint w);

// Every group value expressible as alphabet * 2^shift within group_bits,
// plus 0. Sorted ascending.
std::vector<int> supported_values(const AlphabetSet& a);

struct GroupEncoding {
  bool is_zero = false;
  int alphabet = 0;
  int shift = 0;
};

// Select + shift choice for one group value. Prefers the largest alphabet
// (smallest shift) when several pairs produce the value. Throws
// UnsupportedGroupValue if no pair does.
GroupEncoding encode_group(int value, const AlphabetSet& a);

// alphabet -> alphabet * t.raw, full precision.
using PrecomputeBank = std::map<int, std::int64_t>;
PrecomputeBank precompute_bank(FixedPoint t, const AlphabetSet& a);

// The four-step datapath: generate alphabets, select, shift, add.
// Bit-exactly equal to exact_multiply whenever every group of w is
// supported; throws UnsupportedGroupValue otherwise.
std::int64_t asm_multiply(FixedPoint t, FixedPoint w, const AlphabetSet& a);

// Degenerate {1} datapath: no pre-computer bank, no select; the input is
// shifted directly. Numerically identical to asm_multiply with {1}.
std::int64_t man_multiply(FixedPoint t, FixedPoint w);

}  // namespace asmnn
