#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "asmnn/asm_multiplier.hpp"
#include "asmnn/fixedpoint.hpp"

namespace asmnn {

struct Dataset;

// 256-entry logistic table: pre-activation in Q4.4 clamped to [-8, 8),
// output in unsigned Q0.8. The entries are frozen constants, so results
// carry no libm dependence.
class SigmoidTable {
 public:
  static constexpr int kInputFractionBits = 4;

  // preact is a Q4.4 raw value; anything outside [-128, 127] saturates.
  std::uint8_t lookup(std::int32_t preact_q44) const;
  std::uint8_t entry(int index) const { return kTable[index]; }

 private:
  static const std::array<std::uint8_t, 256> kTable;
};

const SigmoidTable& sigmoid_table();

enum class Activation { kSigmoid, kIdentity };

enum class BackendKind { kExact, kAsm, kMan };

struct LayerBackend {
  BackendKind kind = BackendKind::kExact;
  AlphabetSet alphabets;  // meaningful for kAsm; kMan is implicitly {1}

  static LayerBackend exact() { return {BackendKind::kExact, AlphabetSet{1}}; }
  static LayerBackend man() { return {BackendKind::kMan, AlphabetSet{1}}; }
  static LayerBackend asm_(AlphabetSet a) { return {BackendKind::kAsm, std::move(a)}; }
  // {1} deploys as the multiplier-less datapath, wider sets as ASM.
  static LayerBackend for_alphabets(const AlphabetSet& a);

  std::string name() const;  // "exact" | "man" | "asm{1,3}"
  bool operator==(const LayerBackend&) const = default;
};

using WeightMatrix =
    Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RawVector = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1>;

struct Layer {
  int in_dim = 0;
  int out_dim = 0;
  WeightMatrix weights;  // out_dim x in_dim, raw values in weight format
  RawVector bias;        // raw values in weight format
  Activation activation = Activation::kSigmoid;
};

struct NetworkModel {
  QFormat input_fmt = input_format();
  QFormat weight_fmt = weight_format(8);
  std::vector<Layer> layers;
  std::vector<LayerBackend> backends;  // one per layer

  int input_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out_dim; }
  int layer_count() const { return static_cast<int>(layers.size()); }

  // Dimension chain, backend count, raw ranges. Throws on violation.
  void validate() const;
};

using InputVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

struct ForwardResult {
  InputVector raw;  // final layer output, unsigned Q0.8 raw
  int predicted = 0;
};

// Precomputed select/shift plans for a model, shared read-only across any
// number of forward passes. Building the plan validates that every weight
// of an ASM/MAN layer is supported (throws UnsupportedGroupValue).
class Predictor {
 public:
  explicit Predictor(const NetworkModel& model);

  ForwardResult run(const InputVector& input) const;
  ForwardResult run(const std::uint8_t* input, int n) const;

  const NetworkModel& model() const { return *model_; }

 private:
  struct EncodedTerm {
    std::int8_t alphabet_index;  // -1 for the MAN direct-shift path
    std::int8_t shift;           // total shift including quartet position
  };
  struct EncodedWeight {
    std::int8_t sign;
    std::int8_t n_terms;
    std::array<EncodedTerm, 3> terms;
  };
  struct LayerPlan {
    BackendKind kind;
    std::vector<int> alphabets;
    std::vector<EncodedWeight> encoded;  // row-major, out_dim x in_dim
  };

  const NetworkModel* model_;
  std::vector<LayerPlan> plans_;
};

// Single-shot convenience; builds a Predictor internally.
ForwardResult forward(const NetworkModel& model, const InputVector& input);

// Lowest class index wins argmax ties; a 1-unit output layer classifies by
// raw >= 128 (0.5 in Q0.8).
int predict_class(const InputVector& raw);

struct EvalResult {
  double accuracy = 0.0;
  long correct = 0;
  long total = 0;
  Eigen::MatrixXi confusion;  // actual x predicted
};

EvalResult evaluate(const NetworkModel& model, const Dataset& data);

// Versioned line-oriented text format; byte-identical round trips.
void save_model(const NetworkModel& model, std::ostream& out);
void save_model(const NetworkModel& model, const std::string& path);
NetworkModel load_model(std::istream& in);
NetworkModel load_model_file(const std::string& path);

}  // namespace asmnn
