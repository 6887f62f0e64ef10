#pragma once

#include "subspace/numeric.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace subspace {

/// One grayscale image. Images decoded from PGM have pixel values normalized
/// to [0,1]; synthetic generators may produce values outside that range.
struct ImageSample {
  Matrix pixels;        // r x n'
  std::string label;    // subject identifier
  int source_index = 0; // ordinal within its subject
};

/// Labeled collection of equal-sized image matrices, ordered label-major then
/// by source_index. Immutable after construction.
struct Dataset {
  std::vector<ImageSample> samples;

  Eigen::Index rows() const { return samples.empty() ? 0 : samples.front().pixels.rows(); }
  Eigen::Index cols() const { return samples.empty() ? 0 : samples.front().pixels.cols(); }
  std::size_t size() const { return samples.size(); }
};

enum class SplitPolicy { first_k, seeded_random };

struct Split {
  Dataset train;
  Dataset test;
  SplitPolicy policy;
  int k_per_subject;
};

/// Samples flattened to column vectors (column-major stacking: column 0
/// first). `data` holds one sample per column.
struct VectorizedSet {
  Matrix data;  // (r*n') x n
  std::vector<std::string> labels;
};

/// Decode a PGM image (binary P5 or ASCII P2; 16-bit P5 is big-endian).
/// Pixel values are divided by maxval. The decoded sample is unlabeled.
ImageSample load_pgm(const std::vector<std::uint8_t>& bytes);
ImageSample load_pgm_file(const std::filesystem::path& path);

/// Encode as binary P5 with maxval 255. Values are clamped to [0,1] and
/// rounded; pixels that are exact multiples of 1/255 round-trip exactly.
std::vector<std::uint8_t> save_pgm(const ImageSample& sample);
void save_pgm_file(const ImageSample& sample, const std::filesystem::path& path);

/// Load a corpus laid out as root/<subject>/<image>.pgm. Labels are the
/// subject directory names; files within a subject are ordered by natural
/// filename sort (digit runs compared numerically), subjects likewise.
Dataset load_corpus(const std::filesystem::path& root);

/// Per-subject train/test split. first_k takes the k lowest source_index
/// samples; seeded_random draws k without replacement from a generator keyed
/// by (seed, label), so a subject's draw does not depend on the others.
Split split(const Dataset& d, int k_per_subject, SplitPolicy policy, std::uint64_t seed = 0);

/// Flatten every sample column-major. An r x n' matrix becomes a vector of
/// length r*n' with column 0 first.
VectorizedSet vectorize(const Dataset& d);

/// Every column of every sample as one r x (n*n') matrix, sample-major then
/// column-index order.
Matrix columns_of(const Dataset& d);

/// n zero-mean Gaussian samples in R^d whose covariance has the given
/// spectrum along seeded random orthogonal axes (variance is zero outside
/// them). Samples are vector-shaped (r=d, n'=1), one label per sample.
Dataset synth_gaussian(int n, int d, const std::vector<double>& spectrum, std::uint64_t seed);

/// The orthogonal axes synth_gaussian(seed) draws along, d x spectrum_len.
/// Exposed so tests can compare fitted subspaces against the ground truth.
Matrix synth_gaussian_axes(int d, int spectrum_len, std::uint64_t seed);

/// Add uniform noise of the given amplitude to a seeded-random
/// ceil(fraction*n)-subset of samples. Labels are preserved.
Dataset inject_outliers(const Dataset& d, double fraction, double magnitude, std::uint64_t seed);

/// Natural string comparison: digit runs compare numerically ("2" < "10").
bool natural_less(const std::string& a, const std::string& b);

}  // namespace subspace
