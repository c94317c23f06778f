#include "asmnn/weight_constraint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "asmnn/network.hpp"

namespace asmnn {

namespace {

int group_count(int weight_bits) { return weight_bits / 4; }

// Largest supported value <= v, or -1.
int floor_in(const std::vector<int>& sorted, int v) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), v);
  return it == sorted.begin() ? -1 : *(it - 1);
}

// Smallest supported value >= v, or -1.
int ceil_in(const std::vector<int>& sorted, int v) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  return it == sorted.end() ? -1 : *it;
}

struct GroupSets {
  std::vector<std::vector<int>> supported;  // MSB first
  explicit GroupSets(const ConstraintConfig& cfg) {
    const int n = group_count(cfg.weight_bits);
    supported.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int bits = (i == 0) ? 3 : 4;
      supported.push_back(
          supported_values(cfg.alphabet_set.restricted_to(bits)));
    }
  }
};

std::vector<int> split_groups(std::int32_t magnitude, int n_groups) {
  std::vector<int> groups(static_cast<std::size_t>(n_groups));
  std::uint32_t m = static_cast<std::uint32_t>(magnitude);
  for (int i = n_groups - 1; i >= 0; --i) {
    groups[static_cast<std::size_t>(i)] = static_cast<int>(m & 0xF);
    m >>= 4;
  }
  return groups;
}

std::int32_t join_groups(const std::vector<int>& groups) {
  std::int32_t v = 0;
  for (int g : groups) v = (v << 4) | g;
  return v;
}

// Largest fully-supported magnitude <= m. Walks groups MSB to LSB: the
// first group forced below its target frees all lower groups to their max.
std::int32_t floor_supported(const std::vector<int>& groups,
                             const GroupSets& sets) {
  const int n = static_cast<int>(groups.size());
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& s = sets.supported[static_cast<std::size_t>(i)];
    const int d = floor_in(s, groups[static_cast<std::size_t>(i)]);
    out[static_cast<std::size_t>(i)] = d;
    if (d < groups[static_cast<std::size_t>(i)]) {
      for (int j = i + 1; j < n; ++j)
        out[static_cast<std::size_t>(j)] =
            sets.supported[static_cast<std::size_t>(j)].back();
      break;
    }
  }
  return join_groups(out);
}

// Smallest fully-supported magnitude >= m, or -1 when m exceeds the top.
// A group with no supported value at or above its target carries into the
// nearest higher group that can still be raised.
std::int32_t ceil_supported(const std::vector<int>& groups,
                            const GroupSets& sets) {
  const int n = static_cast<int>(groups.size());
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& s = sets.supported[static_cast<std::size_t>(i)];
    const int d = ceil_in(s, groups[static_cast<std::size_t>(i)]);
    if (d == groups[static_cast<std::size_t>(i)]) {
      out[static_cast<std::size_t>(i)] = d;
      continue;
    }
    int raise_at = (d < 0) ? i - 1 : i;
    int raised = d;
    while (raise_at >= 0) {
      if (raise_at != i)
        raised = ceil_in(sets.supported[static_cast<std::size_t>(raise_at)],
                         out[static_cast<std::size_t>(raise_at)] + 1);
      if (raised >= 0) {
        out[static_cast<std::size_t>(raise_at)] = raised;
        for (int j = raise_at + 1; j < n; ++j)
          out[static_cast<std::size_t>(j)] = 0;
        return join_groups(out);
      }
      --raise_at;
    }
    return -1;
  }
  return join_groups(out);  // every group was already supported
}

}  // namespace

ConstraintConfig::ConstraintConfig(int bits, AlphabetSet a)
    : weight_bits(bits),
      alphabet_set(AlphabetSet(a.alphabets(), 4)) {
  if ((bits - 1) % 4 != 3)
    throw std::invalid_argument(
        "weight_bits must split into a 3-bit MSB group plus quartets");
}

RoundedGroup round_group(int v, const AlphabetSet& a) {
  const int top = 1 << a.group_bits();
  if (v < 0 || v >= top)
    throw std::invalid_argument("group value out of range");
  const std::vector<int> s = supported_values(a);
  if (std::binary_search(s.begin(), s.end(), v)) return {v, 0};
  const int lower = floor_in(s, v);
  int upper = ceil_in(s, v);
  if (upper < 0) upper = top;
  // Midpoint threshold; exact midpoints round up.
  const bool up = 2 * v >= lower + upper;
  if (up && upper == top) return {0, 1};
  return {up ? upper : lower, 0};
}

FixedPoint constrain_weight(FixedPoint w, const ConstraintConfig& cfg) {
  if (w.format.total_bits != cfg.weight_bits)
    throw std::invalid_argument("weight width does not match config");
  if (!w.format.is_signed)
    throw std::invalid_argument("constrain_weight expects a signed weight");
  const GroupSets sets(cfg);
  const int n = group_count(cfg.weight_bits);
  const std::int32_t magnitude = std::abs(w.raw);
  const std::vector<int> groups = split_groups(magnitude, n);

  const std::int32_t lo = floor_supported(groups, sets);
  const std::int32_t hi = ceil_supported(groups, sets);

  std::int32_t best;
  if (hi < 0) {
    best = lo;  // past the top supported magnitude: saturate
  } else if (hi == lo) {
    best = lo;
  } else {
    // Nearest wins; exact midpoints go to the larger magnitude.
    best = (hi - magnitude <= magnitude - lo) ? hi : lo;
  }
  return FixedPoint{w.raw < 0 ? -best : best, w.format};
}

std::vector<std::int32_t> supported_magnitudes(const ConstraintConfig& cfg) {
  const GroupSets sets(cfg);
  const int n = group_count(cfg.weight_bits);
  const std::int32_t top = (std::int32_t{1} << (cfg.weight_bits - 1)) - 1;
  std::vector<std::int32_t> out;
  for (std::int32_t m = 0; m <= top; ++m) {
    const std::vector<int> groups = split_groups(m, n);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      ok = std::binary_search(sets.supported[static_cast<std::size_t>(i)].begin(),
                              sets.supported[static_cast<std::size_t>(i)].end(),
                              groups[static_cast<std::size_t>(i)]);
    if (ok) out.push_back(m);
  }
  return out;
}

std::int32_t max_supported_magnitude(const ConstraintConfig& cfg) {
  return supported_magnitudes(cfg).back();
}

FixedPoint nearest_supported_oracle(FixedPoint w, const ConstraintConfig& cfg) {
  if (w.format.total_bits != cfg.weight_bits)
    throw std::invalid_argument("weight width does not match config");
  const std::vector<std::int32_t> all = supported_magnitudes(cfg);
  const std::int32_t magnitude = std::abs(w.raw);
  std::int32_t best = all.front();
  std::int64_t best_err = std::abs(best - magnitude);
  for (std::int32_t cand : all) {
    const std::int64_t err = std::abs(cand - magnitude);
    if (err < best_err || (err == best_err && cand > best)) {
      best = cand;
      best_err = err;
    }
  }
  return FixedPoint{w.raw < 0 ? -best : best, w.format};
}

std::vector<std::int32_t> projection_table(const ConstraintConfig& cfg,
                                           QFormat weight_fmt) {
  if (weight_fmt.total_bits != cfg.weight_bits)
    throw std::invalid_argument("format width does not match config");
  const std::int32_t top = weight_fmt.max_raw();
  std::vector<std::int32_t> table(static_cast<std::size_t>(2 * top + 1));
  for (std::int32_t raw = -top; raw <= top; ++raw)
    table[static_cast<std::size_t>(raw + top)] =
        constrain_weight(FixedPoint{raw, weight_fmt}, cfg).raw;
  return table;
}

std::string DistortionReport::to_csv() const {
  std::string out = "layer,alphabet_set,modified_count,max_abs_err,mean_abs_err\n";
  char line[160];
  for (const LayerDistortion& l : layers) {
    std::snprintf(line, sizeof line, "%d,%s,%ld,%d,%.6f\n", l.layer,
                  l.alphabet_set.c_str(), l.modified_count, l.max_abs_err,
                  l.mean_abs_err);
    out += line;
  }
  return out;
}

NetworkModel constrain_network(const NetworkModel& model,
                               const std::vector<ConstraintConfig>& per_layer,
                               DistortionReport* report) {
  if (per_layer.size() != model.layers.size())
    throw std::invalid_argument("need one constraint config per layer");
  NetworkModel out = model;
  if (report) report->layers.clear();
  for (std::size_t li = 0; li < out.layers.size(); ++li) {
    const ConstraintConfig& cfg = per_layer[li];
    const std::vector<std::int32_t> table =
        projection_table(cfg, model.weight_fmt);
    const std::int32_t offset = model.weight_fmt.max_raw();

    LayerDistortion stat;
    stat.layer = static_cast<int>(li);
    stat.alphabet_set = cfg.alphabet_set.name();
    long long err_sum = 0;
    long count = 0;
    auto project = [&](std::int32_t raw) {
      const std::int32_t constrained =
          table[static_cast<std::size_t>(raw + offset)];
      const int err = std::abs(constrained - raw);
      if (err != 0) {
        ++stat.modified_count;
        stat.max_abs_err = std::max(stat.max_abs_err, err);
      }
      err_sum += err;
      ++count;
      return constrained;
    };

    Layer& layer = out.layers[li];
    for (int o = 0; o < layer.out_dim; ++o) {
      for (int j = 0; j < layer.in_dim; ++j)
        layer.weights(o, j) = project(layer.weights(o, j));
      layer.bias(o) = project(layer.bias(o));
    }
    out.backends[li] = LayerBackend::for_alphabets(cfg.alphabet_set);

    stat.mean_abs_err =
        count ? static_cast<double>(err_sum) / static_cast<double>(count) : 0.0;
    if (report) report->layers.push_back(stat);
  }
  return out;
}

}  // namespace asmnn
