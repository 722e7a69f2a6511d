#pragma once

// Volumes, label grids and the label-side encodings shared by every module.
//
// Voxel data is stored in one canonical order: x fastest, then y, then z
// (index = x + dx * (y + dy * z)). One-hot matrix rows, mix-matrix rows and
// every on-disk raw file use the same order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace voxmix {

struct Dims {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  constexpr std::size_t count() const noexcept { return x * y * z; }
  constexpr std::size_t operator[](std::size_t axis) const noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  constexpr std::size_t& operator[](std::size_t axis) noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

// A voxel coordinate. Same layout as Dims but a different role.
struct Index3 {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  constexpr std::size_t operator[](std::size_t axis) const noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  constexpr std::size_t& operator[](std::size_t axis) noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  friend constexpr bool operator==(const Index3&, const Index3&) = default;
};

struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  constexpr double operator[](std::size_t axis) const noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  friend constexpr bool operator==(const Spacing&, const Spacing&) = default;
};

constexpr std::size_t linear_index(const Dims& d, std::size_t x, std::size_t y,
                                   std::size_t z) noexcept {
  return x + d.x * (y + d.y * z);
}

constexpr std::size_t linear_index(const Dims& d, const Index3& i) noexcept {
  return linear_index(d, i.x, i.y, i.z);
}

constexpr Index3 unravel_index(const Dims& d, std::size_t i) noexcept {
  return {i % d.x, (i / d.x) % d.y, i / (d.x * d.y)};
}

std::string to_string(const Dims& d);

/// One modality's scalar intensity grid. Immutable once built.
class Volume {
 public:
  Volume() = default;
  /// Throws ConfigError on length mismatch, non-positive spacing or
  /// non-finite samples.
  Volume(Dims shape, Spacing spacing, std::vector<float> data);

  static Volume zeros(Dims shape, Spacing spacing = {});

  const Dims& shape() const noexcept { return shape_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  std::span<const float> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return data_[linear_index(shape_, x, y, z)];
  }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Dims shape_{};
  Spacing spacing_{};
  std::vector<float> data_;
};

struct LabelRegion {
  std::string name;
  std::vector<std::uint8_t> codes;

  friend bool operator==(const LabelRegion&, const LabelRegion&) = default;
};

/// Class codes, their names and the named evaluation regions built from them.
/// The first class code is the background.
class LabelScheme {
 public:
  /// The BraTS scheme.
  LabelScheme();
  /// Validates the scheme; throws ConfigError when invalid.
  LabelScheme(std::vector<std::uint8_t> class_codes, std::vector<std::string> class_names,
              std::vector<LabelRegion> regions);

  /// BraTS convention: codes {0,1,2,4}, regions WT={1,2,4}, TC={1,4}, ET={4}.
  static LabelScheme brats();

  std::size_t class_count() const noexcept { return codes_.size(); }
  const std::vector<std::uint8_t>& class_codes() const noexcept { return codes_; }
  const std::vector<std::string>& class_names() const noexcept { return names_; }
  const std::vector<LabelRegion>& regions() const noexcept { return regions_; }
  std::uint8_t background_code() const noexcept { return codes_.front(); }

  /// Position of `code` in class_codes(), or -1.
  int index_of(std::uint8_t code) const noexcept { return lookup_[code]; }
  bool contains(std::uint8_t code) const noexcept { return lookup_[code] >= 0; }
  const LabelRegion* find_region(std::string_view name) const noexcept;

  friend bool operator==(const LabelScheme& a, const LabelScheme& b) {
    return a.codes_ == b.codes_ && a.names_ == b.names_ && a.regions_ == b.regions_;
  }

 private:
  std::vector<std::uint8_t> codes_;
  std::vector<std::string> names_;
  std::vector<LabelRegion> regions_;
  std::array<int, 256> lookup_{};
};

/// Categorical label grid.
class SegLabel {
 public:
  SegLabel() = default;
  /// Throws InvalidLabelCode naming the first voxel whose code is not in the
  /// scheme.
  SegLabel(Dims shape, std::vector<std::uint8_t> codes, LabelScheme scheme);

  static SegLabel background(Dims shape, LabelScheme scheme);

  const Dims& shape() const noexcept { return shape_; }
  std::span<const std::uint8_t> data() const noexcept { return codes_; }
  const LabelScheme& scheme() const noexcept { return scheme_; }
  std::size_t size() const noexcept { return codes_.size(); }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return codes_[linear_index(shape_, x, y, z)];
  }
  std::uint8_t operator[](std::size_t i) const noexcept { return codes_[i]; }

  friend bool operator==(const SegLabel&, const SegLabel&) = default;

 private:
  Dims shape_{};
  std::vector<std::uint8_t> codes_;
  LabelScheme scheme_;
};

/// Row-stochastic N x k matrix of per-voxel class probabilities, row-major.
class OneHotMatrix {
 public:
  OneHotMatrix() = default;
  /// Throws DataError when an entry leaves [0,1] or a row sum is off by more
  /// than kRowSumTolerance.
  OneHotMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  static constexpr double kRowSumTolerance = 1e-6;

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return std::span<const float>(data_).subspan(i * cols_, cols_);
  }
  float at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  friend bool operator==(const OneHotMatrix&, const OneHotMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(Dims shape, std::vector<std::uint8_t> bits);

  const Dims& shape() const noexcept { return shape_; }
  std::span<const std::uint8_t> data() const noexcept { return bits_; }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  bool at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return bits_[linear_index(shape_, x, y, z)] != 0;
  }
  std::size_t count() const noexcept;
  bool none() const noexcept { return count() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Dims shape_{};
  std::vector<std::uint8_t> bits_;
};

struct NamedVolume {
  std::string name;
  Volume volume;

  friend bool operator==(const NamedVolume&, const NamedVolume&) = default;
};

inline const std::vector<std::string>& default_modalities() {
  static const std::vector<std::string> names{"T1", "T1ce", "T2", "Flair"};
  return names;
}

/// One patient: ordered modality volumes plus the ground-truth label.
class CaseBundle {
 public:
  /// Throws DataError when the modality set is empty, names repeat, or any
  /// shape disagrees with the label.
  CaseBundle(std::string case_id, std::vector<NamedVolume> modalities, SegLabel label,
             std::optional<OneHotMatrix> soft_label = std::nullopt);

  const std::string& case_id() const noexcept { return case_id_; }
  const std::vector<NamedVolume>& modalities() const noexcept { return modalities_; }
  const SegLabel& label() const noexcept { return label_; }
  const std::optional<OneHotMatrix>& soft_label() const noexcept { return soft_label_; }
  const Dims& shape() const noexcept { return label_.shape(); }
  const Spacing& spacing() const noexcept { return modalities_.front().volume.spacing(); }
  const Volume* find_modality(std::string_view name) const noexcept;

  friend bool operator==(const CaseBundle&, const CaseBundle&) = default;

 private:
  std::string case_id_;
  std::vector<NamedVolume> modalities_;
  SegLabel label_;
  std::optional<OneHotMatrix> soft_label_;
};

struct ZScoreResult {
  Volume volume;
  // Set when the input had zero variance; the volume is then all zeros.
  bool degenerate = false;
};

/// Whole-volume z-score with the population standard deviation.
ZScoreResult zscore_normalize(const Volume& vol);

OneHotMatrix encode_one_hot(const SegLabel& seg);

/// Argmax per row, ties to the lowest scheme index. Throws ConfigError when
/// rows/cols disagree with `shape`/`scheme`.
SegLabel decode_argmax(const OneHotMatrix& onehot, const LabelScheme& scheme, Dims shape);

/// Throws ConfigError for an unknown region name.
BinaryMask region_mask(const SegLabel& seg, std::string_view region);

/// Voxels whose code differs from the background code.
BinaryMask foreground_mask(const SegLabel& seg);

}  // namespace voxmix
