#include "voxmix/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "voxmix/error.hpp"

namespace voxmix {

std::string to_string(const Dims& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

Volume::Volume(Dims shape, Spacing spacing, std::vector<float> data)
    : shape_(shape), spacing_(spacing), data_(std::move(data)) {
  if (data_.size() != shape_.count()) {
    throw ConfigError("volume data length " + std::to_string(data_.size()) +
                      " does not match shape " + to_string(shape_));
  }
  if (!(spacing_.x > 0 && spacing_.y > 0 && spacing_.z > 0)) {
    throw ConfigError("volume spacing must be positive");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DataError("non-finite intensity at voxel " + std::to_string(i));
    }
  }
}

Volume Volume::zeros(Dims shape, Spacing spacing) {
  return Volume(shape, spacing, std::vector<float>(shape.count(), 0.0f));
}

LabelScheme::LabelScheme() : LabelScheme(brats()) {}

LabelScheme::LabelScheme(std::vector<std::uint8_t> class_codes,
                         std::vector<std::string> class_names,
                         std::vector<LabelRegion> regions)
    : codes_(std::move(class_codes)), names_(std::move(class_names)), regions_(std::move(regions)) {
  if (codes_.size() < 2) throw ConfigError("label scheme needs at least two classes");
  if (names_.size() != codes_.size()) {
    throw ConfigError("label scheme: class_names and class_codes differ in length");
  }
  lookup_.fill(-1);
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (lookup_[codes_[i]] >= 0) {
      throw ConfigError("label scheme: duplicate class code " + std::to_string(codes_[i]));
    }
    lookup_[codes_[i]] = static_cast<int>(i);
  }
  std::set<std::string> seen;
  for (const auto& region : regions_) {
    if (!seen.insert(region.name).second) {
      throw ConfigError("label scheme: duplicate region " + region.name);
    }
    for (auto code : region.codes) {
      if (lookup_[code] < 0) {
        throw ConfigError("label scheme: region " + region.name + " uses unknown code " +
                          std::to_string(code));
      }
      if (code == codes_.front()) {
        throw ConfigError("label scheme: region " + region.name + " includes the background");
      }
    }
  }
}

LabelScheme LabelScheme::brats() {
  return LabelScheme({0, 1, 2, 4},
                     {"background", "necrosis/non-enhancing", "edema", "enhancing"},
                     {{"WT", {1, 2, 4}}, {"TC", {1, 4}}, {"ET", {4}}});
}

const LabelRegion* LabelScheme::find_region(std::string_view name) const noexcept {
  for (const auto& region : regions_) {
    if (region.name == name) return &region;
  }
  return nullptr;
}

SegLabel::SegLabel(Dims shape, std::vector<std::uint8_t> codes, LabelScheme scheme)
    : shape_(shape), codes_(std::move(codes)), scheme_(std::move(scheme)) {
  if (codes_.size() != shape_.count()) {
    throw ConfigError("label data length " + std::to_string(codes_.size()) +
                      " does not match shape " + to_string(shape_));
  }
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (!scheme_.contains(codes_[i])) throw InvalidLabelCode(i, codes_[i]);
  }
}

SegLabel SegLabel::background(Dims shape, LabelScheme scheme) {
  auto code = scheme.background_code();
  return SegLabel(shape, std::vector<std::uint8_t>(shape.count(), code), std::move(scheme));
}

OneHotMatrix::OneHotMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (cols_ == 0) throw ConfigError("one-hot matrix needs at least one column");
  if (data_.size() != rows_ * cols_) {
    throw ConfigError("one-hot matrix data length does not match rows x cols");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      float v = data_[r * cols_ + c];
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw DataError("one-hot entry out of [0,1] at row " + std::to_string(r));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw DataError("one-hot row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

BinaryMask::BinaryMask(Dims shape, std::vector<std::uint8_t> bits)
    : shape_(shape), bits_(std::move(bits)) {
  if (bits_.size() != shape_.count()) {
    throw ConfigError("mask data length does not match shape " + to_string(shape_));
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

CaseBundle::CaseBundle(std::string case_id, std::vector<NamedVolume> modalities, SegLabel label,
                       std::optional<OneHotMatrix> soft_label)
    : case_id_(std::move(case_id)),
      modalities_(std::move(modalities)),
      label_(std::move(label)),
      soft_label_(std::move(soft_label)) {
  if (modalities_.empty()) throw DataError("case " + case_id_ + " has no modalities");
  std::set<std::string> names;
  for (const auto& m : modalities_) {
    if (!names.insert(m.name).second) {
      throw DataError("case " + case_id_ + " repeats modality " + m.name);
    }
    if (m.volume.shape() != label_.shape()) {
      throw DataError("case " + case_id_ + ": modality " + m.name + " shape " +
                      to_string(m.volume.shape()) + " differs from label shape " +
                      to_string(label_.shape()));
    }
    if (m.volume.spacing() != modalities_.front().volume.spacing()) {
      throw DataError("case " + case_id_ + ": modality spacings differ");
    }
  }
  if (soft_label_ && (soft_label_->rows() != label_.size() ||
                      soft_label_->cols() != label_.scheme().class_count())) {
    throw DataError("case " + case_id_ + ": soft label size does not match the label");
  }
}

const Volume* CaseBundle::find_modality(std::string_view name) const noexcept {
  for (const auto& m : modalities_) {
    if (m.name == name) return &m.volume;
  }
  return nullptr;
}

ZScoreResult zscore_normalize(const Volume& vol) {
  if (vol.empty()) throw ConfigError("zscore_normalize: empty volume");
  auto data = vol.data();
  const auto n = static_cast<double>(data.size());
  double mean = 0.0;
  for (float v : data) mean += v;
  mean /= n;
  double var = 0.0;
  for (float v : data) {
    const double d = v - mean;
    var += d * d;
  }
  var /= n;
  const double sd = std::sqrt(var);

  std::vector<float> out(data.size(), 0.0f);
  // Relative threshold: float inputs that are constant can still show a tiny
  // spread from summation rounding.
  const bool degenerate = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
  if (!degenerate) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      out[i] = static_cast<float>((data[i] - mean) / sd);
    }
  }
  return {Volume(vol.shape(), vol.spacing(), std::move(out)), degenerate};
}

OneHotMatrix encode_one_hot(const SegLabel& seg) {
  const auto& scheme = seg.scheme();
  const std::size_t k = scheme.class_count();
  std::vector<float> data(seg.size() * k, 0.0f);
  auto codes = seg.data();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const int idx = scheme.index_of(codes[i]);
    if (idx < 0) throw InvalidLabelCode(i, codes[i]);
    data[i * k + static_cast<std::size_t>(idx)] = 1.0f;
  }
  return OneHotMatrix(seg.size(), k, std::move(data));
}

SegLabel decode_argmax(const OneHotMatrix& onehot, const LabelScheme& scheme, Dims shape) {
  if (onehot.rows() != shape.count()) {
    throw ConfigError("decode_argmax: " + std::to_string(onehot.rows()) +
                      " rows for shape " + to_string(shape));
  }
  if (onehot.cols() != scheme.class_count()) {
    throw ConfigError("decode_argmax: column count differs from the scheme's class count");
  }
  const auto& codes = scheme.class_codes();
  std::vector<std::uint8_t> out(onehot.rows());
  for (std::size_t r = 0; r < onehot.rows(); ++r) {
    auto row = onehot.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[r] = codes[best];
  }
  return SegLabel(shape, std::move(out), scheme);
}

BinaryMask region_mask(const SegLabel& seg, std::string_view region) {
  const auto* def = seg.scheme().find_region(region);
  if (def == nullptr) throw ConfigError("unknown region '" + std::string(region) + "'");
  std::array<bool, 256> member{};
  for (auto code : def->codes) member[code] = true;
  auto codes = seg.data();
  std::vector<std::uint8_t> bits(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) bits[i] = member[codes[i]] ? 1 : 0;
  return BinaryMask(seg.shape(), std::move(bits));
}

BinaryMask foreground_mask(const SegLabel& seg) {
  const auto bg = seg.scheme().background_code();
  auto codes = seg.data();
  std::vector<std::uint8_t> bits(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) bits[i] = codes[i] != bg ? 1 : 0;
  return BinaryMask(seg.shape(), std::move(bits));
}

}  // namespace voxmix
