#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "asmnn/dataset.hpp"
#include "asmnn/network.hpp"
#include "asmnn/weight_constraint.hpp"

namespace asmnn {

struct TrainConfig {
  std::vector<int> topology;  // layer sizes, inputs first: {784, 64, 10}
  double learning_rate = 0.5;
  double retrain_learning_rate = 0.1;
  int max_epochs = 200;
  int batch_size = 16;
  std::uint32_t seed = 1;
  int saturation_patience = 5;
  double min_improvement = 0.001;  // 0.1 percentage points
  int weight_bits = 8;

  void validate(const Dataset& train, const Dataset& test) const;
};

// Real-valued shadow network used during training; fixed-point models are
// emitted from it by quantize/constrain.
struct FloatNet {
  std::vector<Eigen::MatrixXd> weights;  // out_dim x in_dim
  std::vector<Eigen::VectorXd> bias;

  int layer_count() const { return static_cast<int>(weights.size()); }
};

struct EpochStat {
  int epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
};

std::string training_log_csv(const std::vector<EpochStat>& log);

struct TrainResult {
  FloatNet net;                    // best-epoch snapshot
  double float_accuracy = 0.0;     // test accuracy of the real-valued net
  double baseline_accuracy = 0.0;  // J: quantized but unconstrained
  std::vector<EpochStat> log;
};

// Unconstrained backprop until test accuracy saturates (no >= 0.1pt
// improvement for saturation_patience epochs) or max_epochs. MSE loss on
// one-hot targets with sigmoid units throughout. Throws on divergence.
TrainResult train_float(const TrainConfig& config, const Dataset& train,
                        const Dataset& test);

// The restore point of the methodology: re-running any retrain from it with
// the same config reproduces the emitted model byte for byte.
struct Checkpoint {
  FloatNet net;
  double baseline_accuracy = 0.0;  // J
  TrainConfig config;
};

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& config);

struct RetrainResult {
  NetworkModel model;      // constrained fixed-point model
  double accuracy = 0.0;   // K, measured by the integer engine on test data
  std::vector<EpochStat> log;
};

// Projected-gradient retraining: forward passes run through quantize +
// constrain of the shadow weights (and through the fixed-point activation
// pipeline); gradients pass straight through the projection.
RetrainResult retrain_constrained(const Checkpoint& checkpoint,
                                  const std::vector<ConstraintConfig>& per_layer,
                                  const Dataset& train, const Dataset& test,
                                  std::uint32_t rng_salt = 0);

// Quantizes a float net into a fixed-point model with exact backends.
NetworkModel quantize_network(const FloatNet& net, int weight_bits);

// Projection without retraining (the ablation baseline).
NetworkModel project_network(const FloatNet& net,
                             const std::vector<ConstraintConfig>& per_layer);

std::vector<AlphabetSet> default_ladder();  // {1}, {1,3}, {1,3,5,7}, full

struct MethodologyRung {
  int n_alphabets = 0;
  std::string alphabets;
  double accuracy = 0.0;  // K at this rung
  bool passed = false;
};

struct MethodologyResult {
  NetworkModel model;
  double baseline_accuracy = 0.0;  // J
  double final_accuracy = 0.0;     // K of the accepted rung
  double quality = 0.0;            // Q
  std::vector<MethodologyRung> rungs;
  std::vector<EpochStat> baseline_log;

  std::string report_csv() const;  // rung,n_alphabets,alphabets,accuracy,passed
};

// Train, checkpoint, then walk the alphabet ladder from the smallest set,
// restoring the checkpoint before each attempt, until K >= J * quality.
// Throws QualityUnreachable if even the full set fails the gate.
MethodologyResult methodology_loop(
    const TrainConfig& config, const Dataset& train, const Dataset& test,
    double quality, const std::vector<AlphabetSet>& ladder = default_ladder());

// {1} everywhere except richer sets in the concluding layers: the
// penultimate layer gets `penultimate`, the last layer gets `last`.
// Two-layer nets get {head, last}. Requires at least two layers.
std::vector<AlphabetSet> mixed_layer_assign(
    int n_layers, const AlphabetSet& head = AlphabetSet{1},
    const AlphabetSet& penultimate = AlphabetSet{1, 3},
    const AlphabetSet& last = AlphabetSet{1, 3, 5, 7});

}  // namespace asmnn
