#include "asmnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "asmnn/errors.hpp"
#include "asmnn/rng.hpp"

namespace asmnn {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (int i = 1; i < row.size(); ++i)
    if (row(i) > row(best)) best = i;
  return best;
}

int row_class(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() == 1) return row(0) >= 0.5 ? 1 : 0;
  return argmax_row(row);
}

MatrixXd sigmoid(const MatrixXd& z) {
  return ((-z.array()).exp() + 1.0).inverse().matrix();
}

FloatNet init_net(const std::vector<int>& topology, Rng& rng) {
  FloatNet net;
  for (std::size_t i = 0; i + 1 < topology.size(); ++i) {
    const int in = topology[i];
    const int out = topology[i + 1];
    const double r = 1.0 / std::sqrt(static_cast<double>(in));
    MatrixXd w(out, in);
    for (int o = 0; o < out; ++o)
      for (int j = 0; j < in; ++j) w(o, j) = uniform(rng, -r, r);
    net.weights.push_back(std::move(w));
    net.bias.push_back(VectorXd::Zero(out));
  }
  return net;
}

MatrixXd one_hot(const Dataset& data, const std::vector<int>& idx, int lo,
                 int count, int n_out) {
  MatrixXd y = MatrixXd::Zero(count, n_out);
  for (int r = 0; r < count; ++r) {
    const int label = data.labels[static_cast<std::size_t>(idx[lo + r])];
    if (n_out == 1)
      y(r, 0) = label;
    else
      y(r, label) = 1.0;
  }
  return y;
}

MatrixXd gather_rows(const MatrixXd& x, const std::vector<int>& idx, int lo,
                     int count) {
  MatrixXd out(count, x.cols());
  for (int r = 0; r < count; ++r) out.row(r) = x.row(idx[lo + r]);
  return out;
}

double accuracy_of(const MatrixXd& outputs, const Dataset& data) {
  long correct = 0;
  for (int i = 0; i < outputs.rows(); ++i)
    if (row_class(outputs.row(i)) == data.labels[static_cast<std::size_t>(i)])
      ++correct;
  return static_cast<double>(correct) / static_cast<double>(outputs.rows());
}

MatrixXd forward_plain(const FloatNet& net, const MatrixXd& x) {
  MatrixXd a = x;
  for (int l = 0; l < net.layer_count(); ++l)
    a = sigmoid(((a * net.weights[l].transpose()).rowwise() +
                 net.bias[l].transpose()));
  return a;
}

// Quantized view of one shadow layer: projected raw weights plus their
// real values. Rebuilt whenever the shadow weights change.
struct ProjectedLayer {
  WeightMatrix raw_w;
  RawVector raw_b;
  MatrixXd w;
  VectorXd b;
};

std::int32_t quantize_raw(double x, int fraction_bits, std::int32_t max_raw) {
  std::int64_t raw = round_half_even(
      x * static_cast<double>(std::int64_t{1} << fraction_bits));
  if (raw > max_raw) raw = max_raw;
  if (raw < -max_raw) raw = -max_raw;
  return static_cast<std::int32_t>(raw);
}

ProjectedLayer project_layer(const MatrixXd& w, const VectorXd& b,
                             const std::vector<std::int32_t>* table,
                             QFormat fmt) {
  const std::int32_t top = fmt.max_raw();
  const double scale = 1.0 / static_cast<double>(std::int64_t{1} << fmt.fraction_bits);
  ProjectedLayer out;
  out.raw_w.resize(w.rows(), w.cols());
  out.raw_b.resize(b.size());
  out.w.resize(w.rows(), w.cols());
  out.b.resize(b.size());
  for (int o = 0; o < w.rows(); ++o) {
    for (int j = 0; j < w.cols(); ++j) {
      std::int32_t raw = quantize_raw(w(o, j), fmt.fraction_bits, top);
      if (table) raw = (*table)[static_cast<std::size_t>(raw + top)];
      out.raw_w(o, j) = raw;
      out.w(o, j) = raw * scale;
    }
    std::int32_t raw = quantize_raw(b(o), fmt.fraction_bits, top);
    if (table) raw = (*table)[static_cast<std::size_t>(raw + top)];
    out.raw_b(o) = raw;
    out.b(o) = raw * scale;
  }
  return out;
}

// Forward pass through the fixed-point pipeline, in real arithmetic with
// exact integer-valued intermediates: pre-activations floor to Q4.4 and
// activations go through the frozen sigmoid table, so the result matches
// the integer engine bit for bit (saturation aside, which these nets
// never reach). Returns both the quantized activation and the real-valued
// sigmoid used for the straight-through gradient.
struct QuantForward {
  std::vector<MatrixXd> a_quant;  // per layer, quantized activations
  std::vector<MatrixXd> a_real;   // per layer, smooth sigmoid of the same preact
};

QuantForward forward_quantized(const std::vector<ProjectedLayer>& layers,
                               const MatrixXd& x) {
  const SigmoidTable& table = sigmoid_table();
  QuantForward fw;
  MatrixXd a = x;
  for (const ProjectedLayer& layer : layers) {
    MatrixXd z = (a * layer.w.transpose()).rowwise() + layer.b.transpose();
    MatrixXd aq(z.rows(), z.cols());
    for (int r = 0; r < z.rows(); ++r) {
      for (int c = 0; c < z.cols(); ++c) {
        const double q44 = std::floor(z(r, c) * 16.0);
        const std::int32_t idx =
            static_cast<std::int32_t>(std::clamp(q44, -128.0, 127.0));
        aq(r, c) = table.lookup(idx) / 256.0;
      }
    }
    fw.a_real.push_back(sigmoid(z));
    fw.a_quant.push_back(std::move(aq));
    a = fw.a_quant.back();
  }
  return fw;
}

struct BestTracker {
  double best = -1.0;
  int stall = 0;
  FloatNet snapshot;

  // Returns true when saturation is reached.
  bool update(double acc, const FloatNet& net, double min_improvement,
              int patience) {
    if (acc >= best + min_improvement)
      stall = 0;
    else
      ++stall;
    if (acc > best) {
      best = acc;
      snapshot = net;
    }
    return stall >= patience;
  }
};

void check_finite(double loss) {
  if (!std::isfinite(loss))
    throw std::runtime_error("training diverged: loss is not finite");
}

std::uint32_t mix_seed(std::uint32_t seed, std::uint32_t salt) {
  std::uint32_t h = seed ^ (salt + 0x9e3779b9u + (seed << 6) + (seed >> 2));
  return h ? h : 1u;
}

}  // namespace

void TrainConfig::validate(const Dataset& train, const Dataset& test) const {
  if (topology.size() < 2) throw std::invalid_argument("topology needs >= 2 entries");
  for (int d : topology)
    if (d <= 0) throw std::invalid_argument("topology entries must be positive");
  if (topology.front() != train.dim() || train.dim() != test.dim())
    throw std::invalid_argument("topology input does not match dataset dim");
  const int n_out = topology.back();
  const int needed = n_out == 1 ? 2 : n_out;
  if (train.num_classes > needed || test.num_classes > needed)
    throw std::invalid_argument("output layer too small for the class count");
  if (learning_rate < 0 || retrain_learning_rate < 0)
    throw std::invalid_argument("negative learning rate");
  if (retrain_learning_rate > learning_rate)
    throw std::invalid_argument("retrain learning rate must not exceed learning rate");
  if (max_epochs <= 0 || batch_size <= 0 || saturation_patience <= 0)
    throw std::invalid_argument("epochs, batch size and patience must be positive");
  if (weight_bits != 8 && weight_bits != 12 && (weight_bits - 1) % 4 != 3)
    throw std::invalid_argument("unsupported weight width");
  if (train.size() == 0 || test.size() == 0)
    throw std::invalid_argument("empty dataset");
}

std::string training_log_csv(const std::vector<EpochStat>& log) {
  std::string out = "epoch,train_loss,test_accuracy\n";
  char line[96];
  for (const EpochStat& e : log) {
    std::snprintf(line, sizeof line, "%d,%.8f,%.6f\n", e.epoch, e.train_loss,
                  e.test_accuracy);
    out += line;
  }
  return out;
}

TrainResult train_float(const TrainConfig& config, const Dataset& train,
                        const Dataset& test) {
  config.validate(train, test);
  Rng rng(mix_seed(config.seed, 0));
  FloatNet net = init_net(config.topology, rng);
  const int n_out = config.topology.back();
  const MatrixXd x_train = train.to_real();
  const MatrixXd x_test = test.to_real();

  std::vector<int> order(static_cast<std::size_t>(train.size()));
  for (int i = 0; i < train.size(); ++i) order[static_cast<std::size_t>(i)] = i;

  TrainResult result;
  BestTracker tracker;
  tracker.snapshot = net;
  tracker.best = accuracy_of(forward_plain(net, x_test), test);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    long loss_count = 0;
    for (int lo = 0; lo < train.size(); lo += config.batch_size) {
      const int count = std::min(config.batch_size, train.size() - lo);
      const MatrixXd x = gather_rows(x_train, order, lo, count);
      const MatrixXd y = one_hot(train, order, lo, count, n_out);

      // Forward, keeping activations per layer.
      std::vector<MatrixXd> acts{x};
      for (int l = 0; l < net.layer_count(); ++l)
        acts.push_back(sigmoid(((acts.back() * net.weights[l].transpose())
                                    .rowwise() + net.bias[l].transpose())));

      const MatrixXd& out = acts.back();
      loss_sum += 0.5 * (out - y).array().square().sum();
      loss_count += count;

      // MSE + sigmoid backprop, fixed reduction order.
      MatrixXd delta = (out - y).cwiseProduct(
          out.cwiseProduct((1.0 - out.array()).matrix()));
      for (int l = net.layer_count() - 1; l >= 0; --l) {
        const MatrixXd grad_w = delta.transpose() * acts[static_cast<std::size_t>(l)];
        const VectorXd grad_b = delta.colwise().sum().transpose();
        if (l > 0) {
          const MatrixXd& a = acts[static_cast<std::size_t>(l)];
          delta = (delta * net.weights[l])
                      .cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
        }
        const double step = config.learning_rate / count;
        net.weights[l] -= step * grad_w;
        net.bias[l] -= step * grad_b;
      }
    }
    const double train_loss = loss_sum / static_cast<double>(loss_count);
    check_finite(train_loss);
    const double test_acc = accuracy_of(forward_plain(net, x_test), test);
    result.log.push_back({epoch, train_loss, test_acc});
    if (tracker.update(test_acc, net, config.min_improvement,
                       config.saturation_patience))
      break;
  }

  result.net = tracker.snapshot;
  result.float_accuracy = tracker.best;
  const NetworkModel quantized = quantize_network(result.net, config.weight_bits);
  result.baseline_accuracy = evaluate(quantized, test).accuracy;
  return result;
}

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& config) {
  return Checkpoint{result.net, result.baseline_accuracy, config};
}

NetworkModel quantize_network(const FloatNet& net, int weight_bits) {
  NetworkModel model;
  model.input_fmt = input_format();
  model.weight_fmt = weight_format(weight_bits);
  const std::int32_t top = model.weight_fmt.max_raw();
  for (int l = 0; l < net.layer_count(); ++l) {
    Layer layer;
    layer.in_dim = static_cast<int>(net.weights[l].cols());
    layer.out_dim = static_cast<int>(net.weights[l].rows());
    layer.weights.resize(layer.out_dim, layer.in_dim);
    layer.bias.resize(layer.out_dim);
    for (int o = 0; o < layer.out_dim; ++o) {
      for (int j = 0; j < layer.in_dim; ++j)
        layer.weights(o, j) =
            quantize_raw(net.weights[l](o, j), model.weight_fmt.fraction_bits, top);
      layer.bias(o) =
          quantize_raw(net.bias[l](o), model.weight_fmt.fraction_bits, top);
    }
    layer.activation = Activation::kSigmoid;
    model.layers.push_back(std::move(layer));
    model.backends.push_back(LayerBackend::exact());
  }
  return model;
}

NetworkModel project_network(const FloatNet& net,
                             const std::vector<ConstraintConfig>& per_layer) {
  if (per_layer.empty()) throw std::invalid_argument("no constraint configs");
  NetworkModel quantized = quantize_network(net, per_layer.front().weight_bits);
  return constrain_network(quantized, per_layer);
}

RetrainResult retrain_constrained(const Checkpoint& checkpoint,
                                  const std::vector<ConstraintConfig>& per_layer,
                                  const Dataset& train, const Dataset& test,
                                  std::uint32_t rng_salt) {
  const TrainConfig& config = checkpoint.config;
  config.validate(train, test);
  if (per_layer.size() != checkpoint.net.weights.size())
    throw std::invalid_argument("need one constraint config per layer");

  const QFormat fmt = weight_format(config.weight_bits);
  std::vector<std::vector<std::int32_t>> tables;
  tables.reserve(per_layer.size());
  for (const ConstraintConfig& cfg : per_layer)
    tables.push_back(projection_table(cfg, fmt));
  const double w_limit = fmt.max_raw() * fmt.resolution();

  FloatNet net = checkpoint.net;
  Rng rng(mix_seed(config.seed, rng_salt + 1));
  const int n_out = config.topology.back();
  const int n_layers = net.layer_count();
  const MatrixXd x_train = train.to_real();
  const MatrixXd x_test = test.to_real();

  std::vector<int> order(static_cast<std::size_t>(train.size()));
  for (int i = 0; i < train.size(); ++i) order[static_cast<std::size_t>(i)] = i;

  auto project_all = [&](const FloatNet& n) {
    std::vector<ProjectedLayer> out;
    out.reserve(static_cast<std::size_t>(n_layers));
    for (int l = 0; l < n_layers; ++l)
      out.push_back(project_layer(n.weights[static_cast<std::size_t>(l)],
                                  n.bias[static_cast<std::size_t>(l)],
                                  &tables[static_cast<std::size_t>(l)], fmt));
    return out;
  };
  auto quantized_accuracy = [&](const FloatNet& n) {
    const QuantForward fw = forward_quantized(project_all(n), x_test);
    return accuracy_of(fw.a_quant.back(), test);
  };

  RetrainResult result;
  BestTracker tracker;
  tracker.snapshot = net;
  tracker.best = quantized_accuracy(net);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    long loss_count = 0;
    for (int lo = 0; lo < train.size(); lo += config.batch_size) {
      const int count = std::min(config.batch_size, train.size() - lo);
      const MatrixXd x = gather_rows(x_train, order, lo, count);
      const MatrixXd y = one_hot(train, order, lo, count, n_out);

      const std::vector<ProjectedLayer> projected = project_all(net);
      const QuantForward fw = forward_quantized(projected, x);

      const MatrixXd& out = fw.a_quant.back();
      loss_sum += 0.5 * (out - y).array().square().sum();
      loss_count += count;

      // Straight-through: the loss sees quantized activations, the
      // derivative uses the smooth sigmoid at the same pre-activation.
      MatrixXd delta = (out - y).cwiseProduct(
          fw.a_real.back().cwiseProduct(
              (1.0 - fw.a_real.back().array()).matrix()));
      for (int l = n_layers - 1; l >= 0; --l) {
        const MatrixXd& below =
            l == 0 ? x : fw.a_quant[static_cast<std::size_t>(l - 1)];
        const MatrixXd grad_w = delta.transpose() * below;
        const VectorXd grad_b = delta.colwise().sum().transpose();
        if (l > 0) {
          const MatrixXd& ar = fw.a_real[static_cast<std::size_t>(l - 1)];
          delta = (delta * projected[static_cast<std::size_t>(l)].w)
                      .cwiseProduct(ar.cwiseProduct((1.0 - ar.array()).matrix()));
        }
        const double step = config.retrain_learning_rate / count;
        net.weights[static_cast<std::size_t>(l)] -= step * grad_w;
        net.bias[static_cast<std::size_t>(l)] -= step * grad_b;
        net.weights[static_cast<std::size_t>(l)] =
            net.weights[static_cast<std::size_t>(l)].cwiseMax(-w_limit).cwiseMin(w_limit);
        net.bias[static_cast<std::size_t>(l)] =
            net.bias[static_cast<std::size_t>(l)].cwiseMax(-w_limit).cwiseMin(w_limit);
      }
    }
    const double train_loss = loss_sum / static_cast<double>(loss_count);
    check_finite(train_loss);
    const double test_acc = quantized_accuracy(net);
    result.log.push_back({epoch, train_loss, test_acc});
    if (tracker.update(test_acc, net, config.min_improvement,
                       config.saturation_patience))
      break;
  }

  result.model = project_network(tracker.snapshot, per_layer);
  result.accuracy = evaluate(result.model, test).accuracy;
  return result;
}

std::vector<AlphabetSet> default_ladder() {
  return {AlphabetSet{1}, AlphabetSet{1, 3}, AlphabetSet{1, 3, 5, 7},
          AlphabetSet::full()};
}

std::string MethodologyResult::report_csv() const {
  std::string out = "rung,n_alphabets,alphabets,accuracy,passed\n";
  char line[128];
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    const MethodologyRung& r = rungs[i];
    std::snprintf(line, sizeof line, "%zu,%d,\"%s\",%.6f,%d\n", i + 1,
                  r.n_alphabets, r.alphabets.c_str(), r.accuracy,
                  r.passed ? 1 : 0);
    out += line;
  }
  return out;
}

MethodologyResult methodology_loop(const TrainConfig& config,
                                   const Dataset& train, const Dataset& test,
                                   double quality,
                                   const std::vector<AlphabetSet>& ladder) {
  if (quality < 0.0 || quality > 1.0)
    throw std::invalid_argument("quality constraint must lie in [0, 1]");
  if (ladder.empty()) throw std::invalid_argument("empty alphabet ladder");

  const TrainResult base = train_float(config, train, test);
  const Checkpoint checkpoint = make_checkpoint(base, config);

  MethodologyResult result;
  result.baseline_accuracy = checkpoint.baseline_accuracy;
  result.quality = quality;
  result.baseline_log = base.log;

  for (std::size_t i = 0; i < ladder.size(); ++i) {
    std::vector<ConstraintConfig> per_layer(
        checkpoint.net.weights.size(),
        ConstraintConfig(config.weight_bits, ladder[i]));
    const RetrainResult rr =
        retrain_constrained(checkpoint, per_layer, train, test,
                            static_cast<std::uint32_t>(i));
    MethodologyRung rung;
    rung.n_alphabets = ladder[i].size();
    rung.alphabets = ladder[i].name();
    rung.accuracy = rr.accuracy;
    rung.passed = rr.accuracy >= checkpoint.baseline_accuracy * quality;
    result.rungs.push_back(rung);
    if (rung.passed) {
      result.model = rr.model;
      result.final_accuracy = rr.accuracy;
      return result;
    }
  }
  throw QualityUnreachable(
      "no alphabet set met the quality gate: J=" +
      std::to_string(checkpoint.baseline_accuracy) +
      ", Q=" + std::to_string(quality));
}

std::vector<AlphabetSet> mixed_layer_assign(int n_layers,
                                            const AlphabetSet& head,
                                            const AlphabetSet& penultimate,
                                            const AlphabetSet& last) {
  if (n_layers < 2)
    throw std::invalid_argument("mixed assignment needs at least two layers");
  std::vector<AlphabetSet> out;
  if (n_layers == 2) {
    out = {head, last};
    return out;
  }
  for (int i = 0; i < n_layers - 2; ++i) out.push_back(head);
  out.push_back(penultimate);
  out.push_back(last);
  return out;
}

}  // namespace asmnn
