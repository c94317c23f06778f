#include "asmnn/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "asmnn/errors.hpp"
#include "asmnn/rng.hpp"

namespace asmnn {

Eigen::MatrixXd Dataset::to_real() const {
  return inputs.cast<double>() / 256.0;
}

Dataset Dataset::slice(int from, int count) const {
  if (from < 0 || count < 0 || from + count > size())
    throw std::invalid_argument("slice out of range");
  Dataset out;
  out.inputs = inputs.middleRows(from, count);
  out.labels.assign(labels.begin() + from, labels.begin() + from + count);
  out.num_classes = num_classes;
  out.source = source;
  return out;
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw DataError(std::string("truncated IDX header: ") + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<char*>(b), 4);
}

std::uint8_t to_q08(double x) {
  double v = x * 256.0;
  if (v < 0) v = 0;
  if (v > 255) v = 255;
  return static_cast<std::uint8_t>(v);
}

}  // namespace

Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path, int limit) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot open " + labels_path);

  if (read_be32(img, "image magic") != kImagesMagic)
    throw DataError("bad image magic in " + images_path);
  const std::uint32_t n_images = read_be32(img, "image count");
  const std::uint32_t rows = read_be32(img, "rows");
  const std::uint32_t cols = read_be32(img, "cols");
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
    throw DataError("implausible image dimensions in " + images_path);

  if (read_be32(lab, "label magic") != kLabelsMagic)
    throw DataError("bad label magic in " + labels_path);
  const std::uint32_t n_labels = read_be32(lab, "label count");
  if (n_labels != n_images)
    throw DataError("image/label count mismatch: " + std::to_string(n_images) +
                    " vs " + std::to_string(n_labels));

  std::uint32_t n = n_images;
  if (limit > 0 && static_cast<std::uint32_t>(limit) < n)
    n = static_cast<std::uint32_t>(limit);

  const std::size_t dim = std::size_t{rows} * cols;
  Dataset data;
  data.inputs.resize(n, static_cast<long>(dim));
  data.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(data.inputs.row(i).data()),
                  static_cast<std::streamsize>(dim)))
      throw DataError("truncated image data in " + images_path);
    char l;
    if (!lab.read(&l, 1))
      throw DataError("truncated label data in " + labels_path);
    data.labels[i] = static_cast<unsigned char>(l);
  }
  data.num_classes =
      1 + *std::max_element(data.labels.begin(), data.labels.end());
  data.source = images_path;
  return data;
}

void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path, int rows, int cols) {
  if (rows * cols != data.dim())
    throw std::invalid_argument("rows*cols must equal the dataset dim");
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot write " + images_path);
  write_be32(img, kImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(data.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  for (int i = 0; i < data.size(); ++i)
    img.write(reinterpret_cast<const char*>(data.inputs.row(i).data()),
              data.dim());

  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot write " + labels_path);
  write_be32(lab, kLabelsMagic);
  write_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (int label : data.labels) {
    char l = static_cast<char>(label);
    lab.write(&l, 1);
  }
}

Dataset synth_xor(int n, std::uint32_t seed) {
  if (n <= 0) throw std::invalid_argument("n must be positive");
  Rng rng(seed);
  Dataset data;
  data.inputs.resize(n, 2);
  data.labels.resize(n);
  data.num_classes = 2;
  data.source = "xor";
  const int corners[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int i = 0; i < n; ++i) {
    const int* c = corners[i % 4];
    double jitter_x = 0.0, jitter_y = 0.0;
    if (i >= 4) {
      jitter_x = uniform(rng, -0.1, 0.1);
      jitter_y = uniform(rng, -0.1, 0.1);
    }
    data.inputs(i, 0) = to_q08(c[0] + jitter_x);
    data.inputs(i, 1) = to_q08(c[1] + jitter_y);
    data.labels[i] = c[0] ^ c[1];
  }
  return data;
}

Dataset synth_blobs(int n, std::uint32_t seed, int dim, int classes) {
  if (n <= 0 || dim <= 0 || classes < 2)
    throw std::invalid_argument("bad blob parameters");
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(classes) * dim);
  for (double& m : means) m = uniform(rng, 0.15, 0.85);
  Dataset data;
  data.inputs.resize(n, dim);
  data.labels.resize(n);
  data.num_classes = classes;
  data.source = "blobs";
  for (int i = 0; i < n; ++i) {
    const int c = i % classes;
    for (int d = 0; d < dim; ++d)
      data.inputs(i, d) =
          to_q08(means[static_cast<std::size_t>(c) * dim + d] +
                 0.08 * gaussian(rng));
    data.labels[i] = c;
  }
  return data;
}

Dataset synth_faces(int n, std::uint32_t seed) {
  if (n <= 0) throw std::invalid_argument("n must be positive");
  Rng rng(seed);
  Dataset data;
  data.inputs.resize(n, 64);
  data.labels.resize(n);
  data.num_classes = 2;
  data.source = "faces";

  // Exact balance, then shuffled: generator contract keeps classes 50/50.
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < (n + 1) / 2;
  shuffle(labels, rng);

  for (int i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    // Two feature slots, two positions each; the class is their XOR, so no
    // single-pixel hyperplane separates it.
    const int eyes_top = static_cast<int>(bounded_uint(rng, 2));
    const int mouth_top = label ? eyes_top : 1 - eyes_top;
    const double contrast = uniform(rng, 0.65, 1.0);

    double img[64];
    for (double& p : img) p = uniform(rng, 0.0, 0.12);
    const int eye_row = eyes_top ? 1 : 4;
    img[eye_row * 8 + 2] += 0.75 * contrast;
    img[eye_row * 8 + 5] += 0.75 * contrast;
    const int mouth_row = mouth_top ? 2 : 6;
    for (int c = 2; c <= 5; ++c) img[mouth_row * 8 + c] += 0.6 * contrast;
    for (double& p : img) p += 0.12 * gaussian(rng);

    for (int d = 0; d < 64; ++d) data.inputs(i, d) = to_q08(img[d]);
    data.labels[static_cast<std::size_t>(i)] = label;
  }
  return data;
}

namespace {

// 5x7 pixel font, one row per string.
const char* const kDigitFont[10][7] = {
    {"01110", "10001", "10011", "10101", "11001", "10001", "01110"},
    {"00100", "01100", "00100", "00100", "00100", "00100", "01110"},
    {"01110", "10001", "00001", "00010", "00100", "01000", "11111"},
    {"11111", "00010", "00100", "00010", "00001", "10001", "01110"},
    {"00010", "00110", "01010", "10010", "11111", "00010", "00010"},
    {"11111", "10000", "11110", "00001", "00001", "10001", "01110"},
    {"00110", "01000", "10000", "11110", "10001", "10001", "01110"},
    {"11111", "00001", "00010", "00100", "01000", "01000", "01000"},
    {"01110", "10001", "10001", "01110", "10001", "10001", "01110"},
    {"01110", "10001", "10001", "01111", "00001", "00010", "01100"},
};

}  // namespace

Dataset synth_digits(int n, std::uint32_t seed) {
  if (n <= 0) throw std::invalid_argument("n must be positive");
  Rng rng(seed);
  Dataset data;
  data.inputs.resize(n, 28 * 28);
  data.labels.resize(n);
  data.num_classes = 10;
  data.source = "digits";

  for (int i = 0; i < n; ++i) {
    const int digit = i % 10;
    const int dx = static_cast<int>(bounded_uint(rng, 7)) - 3;
    const int dy = static_cast<int>(bounded_uint(rng, 7)) - 3;
    const double intensity = uniform(rng, 0.7, 1.0);

    double img[28 * 28];
    for (double& p : img) p = uniform(rng, 0.0, 0.08);

    // Glyph cells scale 3x into a 15x21 box, roughly centered.
    for (int gr = 0; gr < 7; ++gr) {
      for (int gc = 0; gc < 5; ++gc) {
        if (kDigitFont[digit][gr][gc] != '1') continue;
        const double cell = intensity * uniform(rng, 0.85, 1.0);
        for (int rr = 0; rr < 3; ++rr) {
          for (int cc = 0; cc < 3; ++cc) {
            const int r = 3 + dy + gr * 3 + rr;
            const int c = 6 + dx + gc * 3 + cc;
            if (r >= 0 && r < 28 && c >= 0 && c < 28) img[r * 28 + c] = cell;
          }
        }
      }
    }
    for (double& p : img) p += 0.08 * gaussian(rng);

    for (int d = 0; d < 28 * 28; ++d) data.inputs(i, d) = to_q08(img[d]);
    data.labels[static_cast<std::size_t>(i)] = digit;
  }
  return data;
}

Dataset synth_dataset(const std::string& kind, int n, std::uint32_t seed) {
  if (kind == "xor") return synth_xor(n, seed);
  if (kind == "blobs") return synth_blobs(n, seed);
  if (kind == "faces") return synth_faces(n, seed);
  if (kind == "digits") return synth_digits(n, seed);
  throw std::invalid_argument("unknown synthetic dataset kind: " + kind);
}

}  // namespace asmnn
