#include <fstream>
#include <sstream>
#include <string>

#include "asmnn/errors.hpp"
#include "asmnn/network.hpp"

namespace asmnn {

namespace {

constexpr const char* kHeader = "asmnn-model v1";

void write_format(std::ostream& out, const char* name, QFormat f) {
  out << name << ' ' << f.total_bits << ' ' << f.fraction_bits << ' '
      << (f.is_signed ? 's' : 'u') << '\n';
}

QFormat parse_format(std::istringstream& in, const std::string& line) {
  QFormat f;
  char s = '?';
  in >> f.total_bits >> f.fraction_bits >> s;
  if (!in || (s != 's' && s != 'u'))
    throw DataError("bad format line: " + line);
  f.is_signed = (s == 's');
  if (!f.valid()) throw DataError("invalid format: " + line);
  return f;
}

std::string backend_token(const LayerBackend& b) {
  switch (b.kind) {
    case BackendKind::kExact: return "exact";
    case BackendKind::kMan: return "man";
    case BackendKind::kAsm: {
      std::string s = "asm ";
      const auto& a = b.alphabets.alphabets();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(a[i]);
      }
      return s;
    }
  }
  return "exact";
}

LayerBackend parse_backend(std::istringstream& in, const std::string& line) {
  std::string kind;
  in >> kind;
  if (kind == "exact") return LayerBackend::exact();
  if (kind == "man") return LayerBackend::man();
  if (kind == "asm") {
    std::string list;
    in >> list;
    if (list.empty()) throw DataError("asm backend needs alphabets: " + line);
    std::vector<int> alphabets;
    std::istringstream ls(list);
    std::string item;
    while (std::getline(ls, item, ','))
      alphabets.push_back(std::stoi(item));
    return LayerBackend::asm_(AlphabetSet(alphabets, 4));
  }
  throw DataError("unknown backend: " + line);
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line))
    throw DataError(std::string("model file truncated before ") + what);
  return line;
}

}  // namespace

void save_model(const NetworkModel& model, std::ostream& out) {
  model.validate();
  out << kHeader << '\n';
  write_format(out, "input_format", model.input_fmt);
  write_format(out, "weight_format", model.weight_fmt);
  out << "layers " << model.layers.size() << '\n';
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    out << "layer " << i << ' ' << l.in_dim << ' ' << l.out_dim << ' '
        << (l.activation == Activation::kSigmoid ? "sigmoid" : "identity")
        << ' ' << backend_token(model.backends[i]) << '\n';
  }
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    out << "weights " << i << '\n';
    for (int o = 0; o < l.out_dim; ++o) {
      for (int j = 0; j < l.in_dim; ++j) {
        if (j) out << ' ';
        out << l.weights(o, j);
      }
      out << '\n';
    }
    out << "bias " << i << '\n';
    for (int o = 0; o < l.out_dim; ++o) {
      if (o) out << ' ';
      out << l.bias(o);
    }
    out << '\n';
  }
  out << "end\n";
}

void save_model(const NetworkModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_model(model, out);
}

NetworkModel load_model(std::istream& in) {
  if (next_line(in, "header") != kHeader)
    throw DataError("not an asmnn model file");

  NetworkModel model;
  {
    std::string line = next_line(in, "input_format");
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != "input_format") throw DataError("expected input_format");
    model.input_fmt = parse_format(ls, line);
  }
  {
    std::string line = next_line(in, "weight_format");
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != "weight_format") throw DataError("expected weight_format");
    model.weight_fmt = parse_format(ls, line);
  }
  int n_layers = 0;
  {
    std::string line = next_line(in, "layers");
    std::istringstream ls(line);
    std::string key;
    ls >> key >> n_layers;
    if (key != "layers" || n_layers <= 0 || n_layers > 256)
      throw DataError("bad layer count: " + line);
  }
  model.layers.resize(static_cast<std::size_t>(n_layers));
  model.backends.resize(static_cast<std::size_t>(n_layers));
  for (int i = 0; i < n_layers; ++i) {
    std::string line = next_line(in, "layer header");
    std::istringstream ls(line);
    std::string key, activation;
    int index = -1, in_dim = 0, out_dim = 0;
    ls >> key >> index >> in_dim >> out_dim >> activation;
    if (key != "layer" || index != i || in_dim <= 0 || out_dim <= 0)
      throw DataError("bad layer header: " + line);
    Layer& l = model.layers[static_cast<std::size_t>(i)];
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    if (activation == "sigmoid")
      l.activation = Activation::kSigmoid;
    else if (activation == "identity")
      l.activation = Activation::kIdentity;
    else
      throw DataError("unknown activation: " + line);
    model.backends[static_cast<std::size_t>(i)] = parse_backend(ls, line);
  }
  for (int i = 0; i < n_layers; ++i) {
    Layer& l = model.layers[static_cast<std::size_t>(i)];
    if (next_line(in, "weights header") != "weights " + std::to_string(i))
      throw DataError("expected weights " + std::to_string(i));
    l.weights.resize(l.out_dim, l.in_dim);
    for (int o = 0; o < l.out_dim; ++o) {
      std::istringstream row(next_line(in, "weight row"));
      for (int j = 0; j < l.in_dim; ++j) {
        if (!(row >> l.weights(o, j)))
          throw DataError("short weight row in layer " + std::to_string(i));
      }
      std::int32_t extra;
      if (row >> extra)
        throw DataError("long weight row in layer " + std::to_string(i));
    }
    if (next_line(in, "bias header") != "bias " + std::to_string(i))
      throw DataError("expected bias " + std::to_string(i));
    l.bias.resize(l.out_dim);
    std::istringstream row(next_line(in, "bias row"));
    for (int o = 0; o < l.out_dim; ++o) {
      if (!(row >> l.bias(o)))
        throw DataError("short bias row in layer " + std::to_string(i));
    }
  }
  if (next_line(in, "end") != "end") throw DataError("missing end marker");
  model.validate();
  return model;
}

NetworkModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_model(in);
}

}  // namespace asmnn
