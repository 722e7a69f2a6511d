#pragma once

// Reproducible randomness for augmentation: a portable generator, Beta and
// Gamma variates, mixing tensors, named sub-streams and pair selection.
//
// Every distribution here is written out by hand on top of std::mt19937_64.
// The standard <random> distributions are implementation-defined, so using
// them would make outputs differ between standard libraries.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voxmix/core_types.hpp"

namespace voxmix {

class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/splitmix64-fnv1a/v1";

  explicit SeededRng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// log of a Gamma(shape, 1) variate. Working in log space keeps tiny shapes
  /// from underflowing to zero.
  double log_gamma_variate(double shape);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

enum class MixMethod { TensorMixup, Mixup, ScalarRoi, CutMix3d };

std::string_view to_string(MixMethod m);
/// Accepts both "scalar_roi" and "scalar-roi" spellings. Throws ConfigError.
MixMethod parse_mix_method(std::string_view name);

enum class CropMode { Random, Center };

struct MixConfig {
  double alpha = 0.5;
  MixMethod method = MixMethod::TensorMixup;
  Dims patch_size{128, 128, 128};
  std::size_t margin = 3;
  std::uint64_t seed = 0;
  CropMode crop = CropMode::Random;

  /// Throws ConfigError.
  void validate() const;
};

/// Per-voxel mixing weights, each in [0, 1].
class MixTensor {
 public:
  MixTensor() = default;
  /// Throws ConfigError when the length disagrees with the shape or a weight
  /// leaves [0, 1].
  MixTensor(Dims shape, std::vector<float> weights);

  static MixTensor constant(Dims shape, float weight);

  const Dims& shape() const noexcept { return shape_; }
  std::span<const float> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  friend bool operator==(const MixTensor&, const MixTensor&) = default;

 private:
  Dims shape_{};
  std::vector<float> data_;
};

/// One draw from Beta(alpha, alpha). Throws ConfigError when alpha <= 0.
double sample_beta(double alpha, SeededRng& rng);

/// Independent Beta(alpha, alpha) weight per voxel, in canonical order.
MixTensor sample_mix_tensor(Dims shape, double alpha, SeededRng& rng);

/// Sub-generator keyed by a label; the result depends only on
/// (master_seed, stream_label).
SeededRng derive_case_rng(std::uint64_t master_seed, std::string_view stream_label);

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stream_label);

/// Two distinct indices, uniform over unordered pairs, in random order.
/// Throws ConfigError when n < 2.
std::pair<std::size_t, std::size_t> sample_pair_indices(std::size_t n, SeededRng& rng);

std::pair<std::string, std::string> sample_pair(std::span<const std::string> case_ids,
                                                SeededRng& rng);

}  // namespace voxmix
