#pragma once

// The mixing algorithms: TensorMixup (one Beta weight per voxel, shared by
// every modality and by the one-hot label through the replicated weight
// matrix), whole-image Mixup, scalar mixing of tumor patches, and a 3D CutMix.

#include <optional>
#include <string>
#include <vector>

#include "voxmix/core_types.hpp"
#include "voxmix/rand_mix.hpp"
#include "voxmix/roi_patch.hpp"

namespace voxmix {

/// N x k weight matrix; every row repeats the voxel's tensor weight k times.
class MixMatrix {
 public:
  MixMatrix() = default;
  MixMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const float> data() const noexcept { return data_; }
  float at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

/// Vectorizes `tensor` in canonical voxel order and replicates it across k
/// columns. Throws ConfigError when k < 1.
MixMatrix map_tensor_to_matrix(const MixTensor& tensor, std::size_t k);

struct Lineage {
  std::string case_i;
  std::string case_j;
  MixMethod method = MixMethod::TensorMixup;
  // Beta parameter; set by the pipeline.
  std::optional<double> alpha;
  // Scalar weight for the scalar mixers.
  std::optional<double> lambda;
  std::optional<PatchProvenance> source_i;
  std::optional<PatchProvenance> source_j;
  // Mixup crop window origin in source coordinates (may be negative).
  std::optional<std::array<std::int64_t, 3>> window_origin;
  std::optional<BBox> cutmix_box;
};

struct SyntheticCase {
  std::vector<NamedVolume> modalities;
  OneHotMatrix soft_label;
  LabelScheme scheme;
  Lineage lineage;

  const Dims& shape() const noexcept { return modalities.front().volume.shape(); }
  const Spacing& spacing() const noexcept { return modalities.front().volume.spacing(); }
};

/// x = a*x1 + (1-a)*x2, evaluated in double and rounded once to float so the
/// endpoints and equal operands come out exact.
inline float mix_value(float a, float x1, float x2) noexcept {
  const double w = a;
  return static_cast<float>(w * x1 + (1.0 - w) * x2);
}

/// Voxelwise mix of two patches with one shared weight tensor. Throws
/// ConfigError on shape, modality-set or scheme mismatch.
SyntheticCase tensormixup(const PatchBundle& p1, const PatchBundle& p2, const MixTensor& weights);

/// Classic Mixup of two whole cases with one scalar weight, at full size.
/// Throws ConfigError on shape/modality mismatch or lambda outside [0,1].
SyntheticCase mixup_whole(const CaseBundle& case_i, const CaseBundle& case_j, double lambda);

/// Source-coordinate origin of the `patch` window centred on `focus`.
/// Clamped inside the volume on axes where the volume is big enough,
/// symmetric zero padding (odd voxel high) otherwise.
std::array<std::int64_t, 3> centered_window_origin(Dims volume, const BBox& focus, Dims patch);

/// Cuts the window at `origin` out of a synthetic case (zero/background
/// outside the source).
SyntheticCase crop_synthetic(const SyntheticCase& s, const std::array<std::int64_t, 3>& origin,
                             Dims size);

/// Mixup followed by a patch crop centred on the union of both tumor boxes
/// (the whole volume when neither has a tumor). Mixing is pointwise, so the
/// two windows are cut first and then mixed; the result equals cropping
/// mixup_whole.
SyntheticCase mixup_patch(const CaseBundle& case_i, const CaseBundle& case_j, double lambda,
                          Dims patch);

/// Constant-weight patch mix; identical to tensormixup with a constant tensor.
SyntheticCase scalar_roi_mix(const PatchBundle& p1, const PatchBundle& p2, double lambda);

/// Box of volume fraction (1 - lambda): each side is patch * (1-lambda)^(1/3)
/// rounded to the nearest voxel, uniformly placed.
BBox cutmix_box(Dims patch, double lambda, SeededRng& rng);

/// Copies `box` from p2 into p1 for every modality; label rows inside the box
/// come from p2, the rest from p1.
SyntheticCase cutmix3d_with_box(const PatchBundle& p1, const PatchBundle& p2, const BBox& box,
                                double lambda);

SyntheticCase cutmix3d(const PatchBundle& p1, const PatchBundle& p2, double lambda,
                       SeededRng& rng);

}  // namespace voxmix
