#include "asmnn/asm_multiplier.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "asmnn/errors.hpp"

namespace asmnn {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(int v) {
  int s = 0;
  while ((1 << s) < v) ++s;
  return s;
}

// Number of groups for a weight width: one 3-bit MSB group + 4-bit quartets.
int group_count(int total_bits) { return (total_bits - 1 + 1) / 4; }

void check_weight_width(int total_bits) {
  if ((total_bits - 1) % 4 != 3) {
    throw std::invalid_argument(
        "weight width must split into a 3-bit MSB group plus 4-bit quartets "
        "(8 or 12 bits)");
  }
}

}  // namespace

AlphabetSet::AlphabetSet(std::initializer_list<int> alphabets, int group_bits)
    : AlphabetSet(std::vector<int>(alphabets), group_bits) {}

AlphabetSet::AlphabetSet(std::vector<int> alphabets, int group_bits)
    : alphabets_(std::move(alphabets)), group_bits_(group_bits) {
  if (group_bits_ < 1 || group_bits_ > 8)
    throw std::invalid_argument("group_bits out of range");
  std::sort(alphabets_.begin(), alphabets_.end());
  alphabets_.erase(std::unique(alphabets_.begin(), alphabets_.end()),
                   alphabets_.end());
  if (alphabets_.empty() || alphabets_.front() != 1)
    throw std::invalid_argument("alphabet set must contain 1");
  for (int a : alphabets_) {
    if (a < 1 || a % 2 == 0)
      throw std::invalid_argument("alphabets must be odd and positive");
    if (a >= (1 << group_bits_))
      throw std::invalid_argument("alphabet " + std::to_string(a) +
                                  " exceeds the group range");
  }
}

AlphabetSet AlphabetSet::full(int group_bits) {
  std::vector<int> a;
  for (int v = 1; v < (1 << group_bits); v += 2) a.push_back(v);
  return AlphabetSet(std::move(a), group_bits);
}

AlphabetSet AlphabetSet::of_size(int n_alphabets, int group_bits) {
  switch (n_alphabets) {
    case 1: return AlphabetSet({1}, group_bits);
    case 2: return AlphabetSet({1, 3}, group_bits);
    case 4: return AlphabetSet({1, 3, 5, 7}, group_bits);
    case 8: return AlphabetSet::full(group_bits);
    default:
      throw std::invalid_argument("ladder sizes are 1, 2, 4, 8");
  }
}

AlphabetSet AlphabetSet::restricted_to(int group_bits) const {
  std::vector<int> kept;
  for (int a : alphabets_)
    if (a < (1 << group_bits)) kept.push_back(a);
  return AlphabetSet(std::move(kept), group_bits);
}

std::string AlphabetSet::name() const {
  std::string s = "{";
  for (std::size_t i = 0; i < alphabets_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(alphabets_[i]);
  }
  return s + "}";
}

std::int32_t Quartets::reassemble() const {
  std::int64_t magnitude = 0;
  for (int g : groups) magnitude = (magnitude << 4) | g;
  return static_cast<std::int32_t>(sign * magnitude);
}

Quartets decompose(FixedPoint w) {
  check_weight_width(w.format.total_bits);
  if (!w.format.is_signed)
    throw std::invalid_argument("decompose expects a signed weight");
  const int n_groups = group_count(w.format.total_bits);
  Quartets q;
  q.sign = w.raw < 0 ? -1 : 1;
  q.source_bits = w.format.total_bits;
  std::uint32_t mag = static_cast<std::uint32_t>(std::abs(w.raw));
  q.groups.resize(n_groups);
  for (int i = n_groups - 1; i >= 0; --i) {
    q.groups[i] = static_cast<int>(mag & 0xF);
    mag >>= 4;
  }
  return q;
}

std::vector<int> supported_values(const AlphabetSet& a) {
  std::set<int> vals{0};
  const int top = 1 << a.group_bits();
  for (int alpha : a.alphabets())
    for (int v = alpha; v < top; v <<= 1) vals.insert(v);
  return {vals.begin(), vals.end()};
}

GroupEncoding encode_group(int value, const AlphabetSet& a) {
  if (value < 0 || value >= (1 << a.group_bits()))
    throw std::invalid_argument("group value out of range");
  if (value == 0) return GroupEncoding{true, 0, 0};
  // Largest alphabet first: deterministic tie-break, smallest shift.
  for (auto it = a.alphabets().rbegin(); it != a.alphabets().rend(); ++it) {
    if (value % *it == 0 && is_power_of_two(value / *it))
      return GroupEncoding{false, *it, log2_exact(value / *it)};
  }
  throw UnsupportedGroupValue(value, a.name());
}

PrecomputeBank precompute_bank(FixedPoint t, const AlphabetSet& a) {
  PrecomputeBank bank;
  for (int alpha : a.alphabets())
    bank[alpha] = static_cast<std::int64_t>(alpha) * t.raw;
  return bank;
}

std::int64_t asm_multiply(FixedPoint t, FixedPoint w, const AlphabetSet& a) {
  const Quartets q = decompose(w);
  const PrecomputeBank bank = precompute_bank(t, a);
  const int n_groups = static_cast<int>(q.groups.size());
  std::int64_t sum = 0;
  for (int i = 0; i < n_groups; ++i) {
    const int position = n_groups - 1 - i;  // quartet index from the LSB
    const int bits = (i == 0) ? 3 : 4;
    const GroupEncoding enc = encode_group(q.groups[i], a.restricted_to(bits));
    if (enc.is_zero) continue;
    sum += bank.at(enc.alphabet) << (enc.shift + 4 * position);
  }
  return q.sign * sum;
}

std::int64_t man_multiply(FixedPoint t, FixedPoint w) {
  const Quartets q = decompose(w);
  const AlphabetSet one{1};
  const int n_groups = static_cast<int>(q.groups.size());
  std::int64_t sum = 0;
  for (int i = 0; i < n_groups; ++i) {
    const int position = n_groups - 1 - i;
    const int bits = (i == 0) ? 3 : 4;
    const int g = q.groups[i];
    if (g == 0) continue;
    if (!is_power_of_two(g) || g >= (1 << bits))
      throw UnsupportedGroupValue(g, one.restricted_to(bits).name());
    // No bank, no select: shift the input directly.
    sum += static_cast<std::int64_t>(t.raw) << (log2_exact(g) + 4 * position);
  }
  return q.sign * sum;
}

}  // namespace asmnn
