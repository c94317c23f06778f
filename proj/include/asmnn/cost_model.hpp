#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asmnn/network.hpp"

namespace asmnn {

// Declared proxy costs per datapath primitive. The defaults make a full
// multiplier much more expensive than shift/select/add, which matches the
// direction of real implementations; the magnitudes are illustrative and
// fully configurable through the cost file.
struct PrimitiveCost {
  double energy = 0.0;
  double area = 0.0;
};

struct CostWeights {
  PrimitiveCost multiply8{35.0, 30.0};
  PrimitiveCost multiply12{80.0, 70.0};
  PrimitiveCost adder_per_8bits{1.0, 1.0};  // scaled by operand width
  PrimitiveCost shifter{0.5, 0.6};
  PrimitiveCost select{0.25, 0.3};
  PrimitiveCost precompute_adder{1.0, 1.0};
  int sharing_factor = 4;  // neurons sharing one pre-computer bank

  const PrimitiveCost& multiply(int weight_bits) const {
    return weight_bits <= 8 ? multiply8 : multiply12;
  }

  // key = energy area   (flat text, '#' comments)
  static CostWeights load(const std::string& path);
  std::string to_text() const;
};

struct OpCounts {
  long long precompute_ops = 0;
  long long selects = 0;
  long long shifts = 0;
  long long adds = 0;  // accumulate + combine adds
  long long multiplies = 0;

  OpCounts& operator+=(const OpCounts& o);
};

struct LayerCost {
  int layer = 0;
  std::string backend;
  OpCounts ops;       // dynamic counts for one forward pass
  double energy = 0;  // weighted dynamic counts
  double area = 0;    // weighted static structure counts
};

// Per-inference operation counts plus energy/area proxies, normalized
// against an all-conventional build of the same model.
struct CostReport {
  std::vector<LayerCost> layers;
  OpCounts total;
  double energy = 0;
  double area = 0;
  double relative_energy = 1.0;
  double relative_area = 1.0;

  std::string to_csv() const;
};

// Counts the datapath work of one forward pass under the given per-layer
// backends. Accumulation adds are counted identically for every backend;
// ASM pre-compute work is amortized over sharing_factor neurons per bank.
CostReport count_ops(const NetworkModel& model,
                     const std::vector<LayerBackend>& backends,
                     const CostWeights& cw = CostWeights{});

// Convenience: uses the model's own backends.
CostReport count_ops(const NetworkModel& model,
                     const CostWeights& cw = CostWeights{});

// (energy ratio, area ratio) of candidate vs baseline.
std::pair<double, double> relative_scores(const CostReport& candidate,
                                          const CostReport& baseline);

// Share of multiply-equivalent operations in the trailing layers; small
// values mean richer tail alphabets cost next to nothing.
double tail_op_share(const NetworkModel& model, int tail_layers = 2);

}  // namespace asmnn
