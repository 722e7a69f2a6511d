#pragma once

// Basic augmentations for real cases: flips, quarter-turn rotations, Gaussian
// noise, brightness scaling and elastic distortion. Geometric ops move every
// modality and the label together; intensity ops never touch the label.

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "voxmix/core_types.hpp"
#include "voxmix/rand_mix.hpp"
#include "voxmix/roi_patch.hpp"

namespace voxmix {

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Throws ConfigError for anything but "x", "y" or "z".
Axis parse_axis(std::string_view name);
std::string_view to_string(Axis a);

struct ElasticParams {
  double grid_spacing = 32.0;      // voxels between control nodes
  double max_displacement = 8.0;   // voxels
  double smoothing_sigma = 1.0;    // in control-node units

  void validate() const;
};

struct FlipOp {
  Axis axis = Axis::X;
  double probability = 1.0;
};

struct Rotate90Op {
  Axis from = Axis::X;
  Axis to = Axis::Y;
  // One entry is chosen uniformly per application.
  std::vector<int> quarter_turns{1, 2, 3};
  double probability = 1.0;
};

struct GaussianNoiseOp {
  double sigma = 0.1;
  double probability = 1.0;
};

struct BrightnessOp {
  double min_scale = 0.9;
  double max_scale = 1.1;
  double probability = 1.0;
};

struct ElasticOp {
  ElasticParams params;
  double probability = 1.0;
};

using AugOp = std::variant<FlipOp, Rotate90Op, GaussianNoiseOp, BrightnessOp, ElasticOp>;

struct AugSpec {
  std::vector<AugOp> ops;
  std::string stream_label = "augment";

  /// In-plane flips, rotations, noise, brightness and elastic distortion.
  static AugSpec defaults();
  /// Throws ConfigError.
  void validate() const;
};

Volume flip(const Volume& vol, Axis axis);
SegLabel flip(const SegLabel& seg, Axis axis);
BinaryMask flip(const BinaryMask& mask, Axis axis);
CaseBundle flip(const CaseBundle& c, Axis axis);
PatchBundle flip(const PatchBundle& p, Axis axis);

/// Rotates by `quarter_turns` x 90 degrees in the (from, to) plane. One turn
/// sends the voxel at u along `from`, v along `to` to from-coordinate
/// size_to - 1 - v and to-coordinate u. Shapes swap on odd turns.
Volume rotate90(const Volume& vol, Axis from, Axis to, int quarter_turns);
SegLabel rotate90(const SegLabel& seg, Axis from, Axis to, int quarter_turns);
BinaryMask rotate90(const BinaryMask& mask, Axis from, Axis to, int quarter_turns);
CaseBundle rotate90(const CaseBundle& c, Axis from, Axis to, int quarter_turns);
PatchBundle rotate90(const PatchBundle& p, Axis from, Axis to, int quarter_turns);

/// Adds independent N(0, sigma^2) noise. Throws ConfigError for sigma < 0.
Volume gaussian_noise(const Volume& vol, double sigma, SeededRng& rng);

/// Throws ConfigError for scale <= 0.
Volume brightness(const Volume& vol, double scale);

/// Smooth displacement field on a coarse node grid, trilinearly upsampled.
class DisplacementField {
 public:
  DisplacementField(Dims shape, double grid_spacing, Dims nodes,
                    std::vector<std::array<float, 3>> node_displacements);

  const Dims& shape() const noexcept { return shape_; }
  const Dims& nodes() const noexcept { return nodes_; }

  /// Displacement (voxels) at voxel (x, y, z).
  std::array<double, 3> at(std::size_t x, std::size_t y, std::size_t z) const noexcept;

  /// Largest |d| over every voxel of the grid.
  double max_magnitude() const noexcept;

 private:
  Dims shape_;
  double spacing_;
  Dims nodes_;
  std::vector<std::array<float, 3>> disp_;
};

DisplacementField sample_displacement_field(Dims shape, const ElasticParams& params,
                                            SeededRng& rng);

/// out(p) = in(p + d(p)): trilinear for intensities, nearest neighbour for
/// labels, zero/background outside the volume.
CaseBundle warp(const CaseBundle& c, const DisplacementField& field);

CaseBundle elastic_distort(const CaseBundle& c, const ElasticParams& params, SeededRng& rng);

/// Applies `spec.ops` in order, each with its probability.
CaseBundle apply_augmentations(const CaseBundle& c, const AugSpec& spec, SeededRng& rng);

}  // namespace voxmix
