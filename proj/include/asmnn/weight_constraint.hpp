#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asmnn/asm_multiplier.hpp"
#include "asmnn/fixedpoint.hpp"

namespace asmnn {

struct NetworkModel;  // nn engine; constrain_network is defined over it

// One alphabet set applies to every group of every weight in a layer;
// the 3-bit MSB group uses the set narrowed to its range.
struct ConstraintConfig {
  int weight_bits = 8;
  AlphabetSet alphabet_set;

  ConstraintConfig() = default;
  ConstraintConfig(int bits, AlphabetSet a);
};

struct RoundedGroup {
  int value = 0;
  int carry = 0;  // 1 when the nearest value is 2^group_bits
};

// Nearest supported value by midpoint threshold; exact midpoints round up.
// Rounding past the top supported value yields (0, carry=1).
RoundedGroup round_group(int v, const AlphabetSet& a);

// Projects a weight onto the nearest value whose groups are all supported
// (ties toward larger magnitude, sign preserved). Implemented as a
// per-group floor/ceil walk over the quartets, not by enumeration.
FixedPoint constrain_weight(FixedPoint w, const ConstraintConfig& cfg);

// Same projection by literal exhaustive search over every fully-supported
// magnitude; the arbiter the fast path is audited against.
FixedPoint nearest_supported_oracle(FixedPoint w, const ConstraintConfig& cfg);

// All fully-supported magnitudes for a config, ascending (includes 0).
std::vector<std::int32_t> supported_magnitudes(const ConstraintConfig& cfg);
std::int32_t max_supported_magnitude(const ConstraintConfig& cfg);

// raw + offset -> constrained raw, for bulk application; index raw by
// raw + max_raw (table covers [-max_raw, max_raw]).
std::vector<std::int32_t> projection_table(const ConstraintConfig& cfg,
                                           QFormat weight_fmt);

struct LayerDistortion {
  int layer = 0;
  std::string alphabet_set;
  long modified_count = 0;
  int max_abs_err = 0;
  double mean_abs_err = 0.0;
};

struct DistortionReport {
  std::vector<LayerDistortion> layers;
  std::string to_csv() const;
};

// Applies constrain_weight elementwise to every layer's weights and biases
// and points each layer's backend at its alphabet set ({1} becomes the
// multiplier-less datapath). One config per layer.
NetworkModel constrain_network(const NetworkModel& model,
                               const std::vector<ConstraintConfig>& per_layer,
                               DistortionReport* report = nullptr);

}  // namespace asmnn
