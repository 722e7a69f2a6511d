#pragma once

// Tumor bounding boxes, zero padding, fixed-size crops and the padding used
// to bring test volumes up to the network input size.

#include <optional>
#include <string>

#include "voxmix/core_types.hpp"
#include "voxmix/rand_mix.hpp"

namespace voxmix {

/// Half-open voxel box: lo inclusive, hi exclusive.
struct BBox {
  Index3 lo;
  Index3 hi;

  Dims size() const noexcept { return {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z}; }
  bool contains(const Index3& p) const noexcept {
    return p.x >= lo.x && p.x < hi.x && p.y >= lo.y && p.y < hi.y && p.z >= lo.z &&
           p.z < hi.z;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Tight box around all non-background voxels, or nullopt when there are none.
std::optional<BBox> foreground_bbox(const SegLabel& seg);

/// Tight foreground box grown by `margin` per side and clamped to the volume.
/// Throws NoTumorError for an all-background label.
BBox tumor_bbox(const SegLabel& seg, std::size_t margin);

/// Smallest box covering both.
BBox bbox_union(const BBox& a, const BBox& b);

struct PadAmounts {
  Dims low{};
  Dims high{};

  friend bool operator==(const PadAmounts&, const PadAmounts&) = default;
};

/// Symmetric padding that lifts every axis of `region` to at least `min_size`;
/// the odd voxel goes to the high side.
PadAmounts pad_amounts_to_min(Dims region, Dims min_size);

Volume pad_volume(const Volume& vol, const PadAmounts& pad, float fill = 0.0f);
/// Pads with the scheme's background code.
SegLabel pad_label(const SegLabel& seg, const PadAmounts& pad);

Volume crop_volume(const Volume& vol, const Index3& offset, Dims size);
SegLabel crop_label(const SegLabel& seg, const Index3& offset, Dims size);
CaseBundle crop_case(const CaseBundle& c, const BBox& box);

struct PaddedRegion {
  CaseBundle region;
  PadAmounts pad;
};

/// Zero-pads every modality (background for the label) up to `min_size`.
PaddedRegion pad_to_min(const CaseBundle& region, Dims min_size);

/// Inclusive per-axis range of admissible crop offsets.
struct OffsetRange {
  Index3 lo;
  Index3 hi;
};

/// Uniform random offset in [0, region - size] per axis, restricted to
/// `allowed` when given. Throws ConfigError when region is smaller than size.
Index3 crop_fixed(Dims region, Dims size, SeededRng& rng,
                  const std::optional<OffsetRange>& allowed = std::nullopt);

/// Centered offset (floor) within the admissible range.
Index3 crop_center(Dims region, Dims size,
                   const std::optional<OffsetRange>& allowed = std::nullopt);

struct PatchProvenance {
  std::string case_id;
  Dims source_shape{};
  BBox bbox{};
  PadAmounts pad{};
  Index3 crop_offset{};
};

/// Source voxel for a patch voxel, or nullopt when it lies in the padding.
std::optional<Index3> relocate(const PatchProvenance& prov, const Index3& patch_voxel);

struct PatchBundle {
  std::vector<NamedVolume> modalities;
  SegLabel label;
  OneHotMatrix onehot;
  PatchProvenance provenance;

  const Dims& shape() const noexcept { return label.shape(); }
  const Spacing& spacing() const noexcept { return modalities.front().volume.spacing(); }
};

/// bbox -> pad -> crop, applied identically to every modality and the label.
/// When the tight tumor extent fits the patch on an axis, the crop on that axis
/// keeps the whole tumor; on the other axes it contains one tumor voxel drawn
/// uniformly (the middle one in scan order for CropMode::Center). Throws
/// NoTumorError.
PatchBundle extract_tumor_patch(const CaseBundle& c, const MixConfig& cfg, SeededRng& rng);

struct InferencePad {
  Dims original{};
  Dims padded{};

  friend bool operator==(const InferencePad&, const InferencePad&) = default;
};

struct PaddedCase {
  CaseBundle bundle;
  InferencePad record;
};

/// Appends zeros on the high side of each axis up to `target`. Throws
/// ConfigError when target is smaller than the case on any axis.
PaddedCase pad_for_inference(const CaseBundle& c, Dims target);

Volume crop_back(const Volume& vol, const InferencePad& record);
SegLabel crop_back(const SegLabel& seg, const InferencePad& record);
CaseBundle crop_back(const CaseBundle& c, const InferencePad& record);

}  // namespace voxmix
