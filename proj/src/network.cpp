#include "asmnn/network.hpp"

#include <algorithm>
#include <stdexcept>

#include "asmnn/dataset.hpp"
#include "asmnn/errors.hpp"

namespace asmnn {

// Frozen logistic table: entry i is sigmoid((i - 128) / 16) in unsigned
// Q0.8, rounded half-to-even and capped at 255.
const std::array<std::uint8_t, 256> SigmoidTable::kTable = {
      0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,
      0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   1,   1,   1,
      1,   1,   1,   1,   1,   1,   1,   1,   1,   1,   1,   1,   1,   1,   2,   2,
      2,   2,   2,   2,   2,   2,   2,   3,   3,   3,   3,   3,   4,   4,   4,   4,
      5,   5,   5,   6,   6,   6,   7,   7,   8,   8,   8,   9,  10,  10,  11,  11,
     12,  13,  14,  15,  15,  16,  17,  18,  19,  21,  22,  23,  24,  26,  27,  29,
     31,  32,  34,  36,  38,  40,  42,  44,  47,  49,  52,  54,  57,  60,  63,  66,
     69,  72,  75,  79,  82,  86,  89,  93,  97, 100, 104, 108, 112, 116, 120, 124,
    128, 132, 136, 140, 144, 148, 152, 156, 159, 163, 167, 170, 174, 177, 181, 184,
    187, 190, 193, 196, 199, 202, 204, 207, 209, 212, 214, 216, 218, 220, 222, 224,
    225, 227, 229, 230, 232, 233, 234, 235, 237, 238, 239, 240, 241, 241, 242, 243,
    244, 245, 245, 246, 246, 247, 248, 248, 248, 249, 249, 250, 250, 250, 251, 251,
    251, 252, 252, 252, 252, 253, 253, 253, 253, 253, 254, 254, 254, 254, 254, 254,
    254, 254, 254, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255,
    255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255,
    255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255, 255,
};

std::uint8_t SigmoidTable::lookup(std::int32_t preact_q44) const {
  if (preact_q44 < -128) preact_q44 = -128;
  if (preact_q44 > 127) preact_q44 = 127;
  return kTable[static_cast<std::size_t>(preact_q44 + 128)];
}

const SigmoidTable& sigmoid_table() {
  static const SigmoidTable table;
  return table;
}

LayerBackend LayerBackend::for_alphabets(const AlphabetSet& a) {
  return a.size() == 1 ? man() : asm_(a);
}

std::string LayerBackend::name() const {
  switch (kind) {
    case BackendKind::kExact: return "exact";
    case BackendKind::kMan: return "man";
    case BackendKind::kAsm: return "asm" + alphabets.name();
  }
  return "?";
}

void NetworkModel::validate() const {
  if (layers.empty()) throw std::invalid_argument("model has no layers");
  if (backends.size() != layers.size())
    throw std::invalid_argument("backend count does not match layer count");
  if (!input_fmt.valid() || !weight_fmt.valid())
    throw std::invalid_argument("invalid formats");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (l.weights.rows() != l.out_dim || l.weights.cols() != l.in_dim ||
        l.bias.size() != l.out_dim)
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  " has inconsistent shapes");
    if (i + 1 < layers.size() && l.out_dim != layers[i + 1].in_dim)
      throw std::invalid_argument("dimension chain broken at layer " +
                                  std::to_string(i));
    const std::int32_t lo = weight_fmt.min_raw();
    const std::int32_t hi = weight_fmt.max_raw();
    if ((l.weights.array() < lo).any() || (l.weights.array() > hi).any() ||
        (l.bias.array() < lo).any() || (l.bias.array() > hi).any())
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  " has raw values outside the weight format");
  }
}

namespace {

int log2_exact(int v) {
  int s = 0;
  while ((1 << s) < v) ++s;
  return s;
}

}  // namespace

Predictor::Predictor(const NetworkModel& model) : model_(&model) {
  model.validate();
  plans_.resize(model.layers.size());
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const Layer& layer = model.layers[li];
    const LayerBackend& backend = model.backends[li];
    LayerPlan& plan = plans_[li];
    plan.kind = backend.kind;
    if (backend.kind == BackendKind::kExact) continue;

    const AlphabetSet& set = backend.kind == BackendKind::kMan
                                 ? AlphabetSet{1}
                                 : backend.alphabets;
    plan.alphabets = set.alphabets();

    auto encode = [&](std::int32_t raw) {
      const Quartets q = decompose(FixedPoint{raw, model.weight_fmt});
      EncodedWeight ew{};
      ew.sign = static_cast<std::int8_t>(q.sign);
      ew.n_terms = 0;
      const int n_groups = static_cast<int>(q.groups.size());
      for (int g = 0; g < n_groups; ++g) {
        const int position = n_groups - 1 - g;
        const int bits = (g == 0) ? 3 : 4;
        const GroupEncoding enc =
            encode_group(q.groups[g], set.restricted_to(bits));
        if (enc.is_zero) continue;
        EncodedTerm term{};
        term.shift = static_cast<std::int8_t>(enc.shift + 4 * position);
        if (backend.kind == BackendKind::kMan) {
          term.alphabet_index = -1;
        } else {
          const auto it = std::find(plan.alphabets.begin(),
                                    plan.alphabets.end(), enc.alphabet);
          term.alphabet_index =
              static_cast<std::int8_t>(it - plan.alphabets.begin());
        }
        ew.terms[ew.n_terms++] = term;
      }
      return ew;
    };

    plan.encoded.reserve(static_cast<std::size_t>(layer.out_dim) *
                         layer.in_dim + layer.out_dim);
    for (int o = 0; o < layer.out_dim; ++o)
      for (int j = 0; j < layer.in_dim; ++j)
        plan.encoded.push_back(encode(layer.weights(o, j)));
    // Bias terms ride the same datapath; encoded plans keep them at the tail.
    for (int o = 0; o < layer.out_dim; ++o)
      plan.encoded.push_back(encode(layer.bias(o)));
  }
}

ForwardResult Predictor::run(const InputVector& input) const {
  return run(input.data(), static_cast<int>(input.size()));
}

ForwardResult Predictor::run(const std::uint8_t* input, int n) const {
  const NetworkModel& m = *model_;
  if (n != m.input_dim())
    throw std::invalid_argument("input length " + std::to_string(n) +
                                " does not match model input dim " +
                                std::to_string(m.input_dim()));

  // Accumulator carries input_frac + weight_frac fractional bits; the
  // pre-activation is arithmetic-shifted back to Q4.4 before the table.
  const int acc_frac = m.input_fmt.fraction_bits + m.weight_fmt.fraction_bits;
  const int rescale_shift = acc_frac - SigmoidTable::kInputFractionBits;
  const int bias_shift = m.input_fmt.fraction_bits;
  const SigmoidTable& table = sigmoid_table();

  std::vector<std::uint8_t> current(input, input + n);
  std::vector<std::uint8_t> next;
  std::vector<std::int32_t> bank;  // CSHM: per input, shared by all neurons

  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const Layer& layer = m.layers[li];
    const LayerPlan& plan = plans_[li];
    next.assign(static_cast<std::size_t>(layer.out_dim), 0);

    const int n_alpha = static_cast<int>(plan.alphabets.size());
    if (plan.kind == BackendKind::kAsm) {
      bank.assign(static_cast<std::size_t>(layer.in_dim) * n_alpha, 0);
      for (int j = 0; j < layer.in_dim; ++j)
        for (int a = 0; a < n_alpha; ++a)
          bank[static_cast<std::size_t>(j) * n_alpha + a] =
              plan.alphabets[a] * static_cast<std::int32_t>(current[j]);
    }

    for (int o = 0; o < layer.out_dim; ++o) {
      Accumulator acc;
      switch (plan.kind) {
        case BackendKind::kExact: {
          const std::int32_t* w_row = layer.weights.row(o).data();
          for (int j = 0; j < layer.in_dim; ++j)
            acc.add(static_cast<std::int64_t>(current[j]) * w_row[j]);
          acc.add(static_cast<std::int64_t>(layer.bias(o)) << bias_shift);
          break;
        }
        case BackendKind::kMan: {
          const EncodedWeight* row =
              plan.encoded.data() + static_cast<std::size_t>(o) * layer.in_dim;
          for (int j = 0; j < layer.in_dim; ++j) {
            const EncodedWeight& ew = row[j];
            std::int64_t product = 0;
            for (int t = 0; t < ew.n_terms; ++t)
              product += static_cast<std::int64_t>(current[j])
                         << ew.terms[t].shift;
            acc.add(ew.sign * product);
          }
          const EncodedWeight& eb =
              plan.encoded[static_cast<std::size_t>(layer.out_dim) *
                               layer.in_dim + o];
          std::int64_t b = 0;
          for (int t = 0; t < eb.n_terms; ++t)
            b += std::int64_t{1} << eb.terms[t].shift;
          acc.add((eb.sign * b) << bias_shift);
          break;
        }
        case BackendKind::kAsm: {
          const EncodedWeight* row =
              plan.encoded.data() + static_cast<std::size_t>(o) * layer.in_dim;
          for (int j = 0; j < layer.in_dim; ++j) {
            const EncodedWeight& ew = row[j];
            const std::int32_t* b = &bank[static_cast<std::size_t>(j) * n_alpha];
            std::int64_t product = 0;
            for (int t = 0; t < ew.n_terms; ++t)
              product += static_cast<std::int64_t>(b[ew.terms[t].alphabet_index])
                         << ew.terms[t].shift;
            acc.add(ew.sign * product);
          }
          const EncodedWeight& eb =
              plan.encoded[static_cast<std::size_t>(layer.out_dim) *
                               layer.in_dim + o];
          std::int64_t b = 0;
          for (int t = 0; t < eb.n_terms; ++t)
            b += static_cast<std::int64_t>(plan.alphabets[eb.terms[t].alphabet_index])
                 << eb.terms[t].shift;
          acc.add((eb.sign * b) << bias_shift);
          break;
        }
      }

      std::int32_t preact = acc.raw >> rescale_shift;
      if (layer.activation == Activation::kSigmoid) {
        next[o] = table.lookup(preact);
      } else {
        // Identity keeps the Q0.8 interface: rescale and clamp to [0, 255].
        std::int64_t q08 = static_cast<std::int64_t>(preact) << 4;
        next[o] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(q08, 0, 255));
      }
    }
    current.swap(next);
  }

  ForwardResult result;
  result.raw = Eigen::Map<const InputVector>(current.data(),
                                             static_cast<long>(current.size()));
  result.predicted = predict_class(result.raw);
  return result;
}

int predict_class(const InputVector& raw) {
  if (raw.size() == 0) throw std::invalid_argument("empty output vector");
  if (raw.size() == 1) return raw(0) >= 128 ? 1 : 0;
  int best = 0;
  for (int i = 1; i < raw.size(); ++i)
    if (raw(i) > raw(best)) best = i;
  return best;
}

ForwardResult forward(const NetworkModel& model, const InputVector& input) {
  return Predictor(model).run(input);
}

EvalResult evaluate(const NetworkModel& model, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
  if (data.dim() != model.input_dim())
    throw std::invalid_argument("dataset dim does not match model");
  const Predictor predictor(model);
  const int classes = std::max(data.num_classes, 2);
  EvalResult result;
  result.confusion = Eigen::MatrixXi::Zero(classes, classes);
  for (int i = 0; i < data.size(); ++i) {
    const ForwardResult fr = predictor.run(data.inputs.row(i).data(), data.dim());
    const int actual = data.labels[static_cast<std::size_t>(i)];
    result.confusion(actual, std::min(fr.predicted, classes - 1)) += 1;
    if (fr.predicted == actual) ++result.correct;
  }
  result.total = data.size();
  result.accuracy =
      static_cast<double>(result.correct) / static_cast<double>(result.total);
  return result;
}

}  // namespace asmnn
