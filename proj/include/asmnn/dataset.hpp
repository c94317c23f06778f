#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace asmnn {

// Labeled samples with inputs already quantized to unsigned Q0.8 raw bytes.
struct Dataset {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      inputs;  // n x dim
  std::vector<int> labels;
  int num_classes = 0;
  std::string source;

  int size() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }

  // Real-valued view for training: raw / 256.
  Eigen::MatrixXd to_real() const;

  Dataset slice(int from, int count) const;
};

// Parses the big-endian IDX pair (images magic 0x803, labels 0x801),
// normalizing pixels into Q0.8. limit = 0 keeps everything. Throws
// DataError on bad magic, truncation or image/label count mismatch.
Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path, int limit = 0);

// Writes the IDX pair back out (rows x cols must tile the input dim).
void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path, int rows, int cols);

// Deterministic synthetic fixtures. All of them depend only on (n, seed).
Dataset synth_xor(int n, std::uint32_t seed);
Dataset synth_blobs(int n, std::uint32_t seed, int dim = 16, int classes = 3);
// 8x8 two-class images, exactly balanced, not linearly separable.
Dataset synth_faces(int n, std::uint32_t seed);
// 28x28 ten-class glyph images; a stand-in with MNIST's shape.
Dataset synth_digits(int n, std::uint32_t seed);

// kind: "xor" | "blobs" | "faces" | "digits".
Dataset synth_dataset(const std::string& kind, int n, std::uint32_t seed);

}  // namespace asmnn
