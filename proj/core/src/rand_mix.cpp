#include "voxmix/rand_mix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voxmix/error.hpp"

namespace voxmix {

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform_open() {
  // (k + 0.5) / 2^53 for k in [0, 2^53) never hits either endpoint.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t SeededRng::uniform_below(std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform_below: empty range");
  // Rejection sampling on the largest multiple of n.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % n;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  has_spare_ = true;
  return u * f;
}

double SeededRng::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw ConfigError("gamma shape must be positive");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a).
    const double boosted = log_gamma_variate(shape + 1.0);
    return boosted + std::log(uniform_open()) / shape;
  }
  // Marsaglia & Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

std::string_view to_string(MixMethod m) {
  switch (m) {
    case MixMethod::TensorMixup:
      return "tensormixup";
    case MixMethod::Mixup:
      return "mixup";
    case MixMethod::ScalarRoi:
      return "scalar_roi";
    case MixMethod::CutMix3d:
      return "cutmix3d";
  }
  return "unknown";
}

MixMethod parse_mix_method(std::string_view name) {
  if (name == "tensormixup") return MixMethod::TensorMixup;
  if (name == "mixup") return MixMethod::Mixup;
  if (name == "scalar_roi" || name == "scalar-roi") return MixMethod::ScalarRoi;
  if (name == "cutmix3d") return MixMethod::CutMix3d;
  throw ConfigError("unknown mix method '" + std::string(name) + "'");
}

void MixConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("mix alpha must be > 0");
  if (patch_size.x == 0 || patch_size.y == 0 || patch_size.z == 0) {
    throw ConfigError("patch dimensions must be >= 1");
  }
}

MixTensor::MixTensor(Dims shape, std::vector<float> weights)
    : shape_(shape), data_(std::move(weights)) {
  if (data_.size() != shape_.count()) {
    throw ConfigError("mix tensor length does not match shape " + to_string(shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!(data_[i] >= 0.0f && data_[i] <= 1.0f)) {
      throw ConfigError("mix tensor weight out of [0,1] at element " + std::to_string(i));
    }
  }
}

MixTensor MixTensor::constant(Dims shape, float weight) {
  return MixTensor(shape, std::vector<float>(shape.count(), weight));
}

double sample_beta(double alpha, SeededRng& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("Beta alpha must be > 0, got " + std::to_string(alpha));
  }
  // X / (X + Y) = 1 / (1 + exp(log Y - log X)).
  const double lx = rng.log_gamma_variate(alpha);
  const double ly = rng.log_gamma_variate(alpha);
  const double b = 1.0 / (1.0 + std::exp(ly - lx));
  return std::clamp(b, 0.0, 1.0);
}

MixTensor sample_mix_tensor(Dims shape, double alpha, SeededRng& rng) {
  if (shape.count() == 0) throw ConfigError("mix tensor shape must be positive");
  std::vector<float> w(shape.count());
  for (auto& v : w) v = static_cast<float>(sample_beta(alpha, rng));
  return MixTensor(shape, std::move(w));
}

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stream_label) {
  return splitmix64(splitmix64(master_seed) ^ fnv1a64(stream_label));
}

SeededRng derive_case_rng(std::uint64_t master_seed, std::string_view stream_label) {
  return SeededRng(derive_seed(master_seed, stream_label));
}

std::pair<std::size_t, std::size_t> sample_pair_indices(std::size_t n, SeededRng& rng) {
  if (n < 2) throw ConfigError("pair sampling needs at least 2 cases");
  const auto i = static_cast<std::size_t>(rng.uniform_below(n));
  auto j = static_cast<std::size_t>(rng.uniform_below(n - 1));
  if (j >= i) ++j;
  return {i, j};
}

std::pair<std::string, std::string> sample_pair(std::span<const std::string> case_ids,
                                                SeededRng& rng) {
  auto [i, j] = sample_pair_indices(case_ids.size(), rng);
  return {case_ids[i], case_ids[j]};
}

}  // namespace voxmix
