#include "voxmix/roi_patch.hpp"

#include <algorithm>
#include <limits>

#include "voxmix/error.hpp"
#include "window.hpp"

namespace voxmix {

using detail::SignedIndex3;

namespace {

SignedIndex3 to_signed(const Index3& i) {
  return {static_cast<std::int64_t>(i.x), static_cast<std::int64_t>(i.y),
          static_cast<std::int64_t>(i.z)};
}

Index3 full_extent(const Dims& d) { return {d.x, d.y, d.z}; }

Volume window_volume(const Volume& v, const SignedIndex3& origin, Dims size,
                     const Index3& valid_lo, const Index3& valid_hi) {
  return Volume(size, v.spacing(),
                detail::extract_window(v.data(), v.shape(), origin, size, valid_lo, valid_hi,
                                       0.0f));
}

SegLabel window_label(const SegLabel& s, const SignedIndex3& origin, Dims size,
                      const Index3& valid_lo, const Index3& valid_hi) {
  return SegLabel(size,
                  detail::extract_window(s.data(), s.shape(), origin, size, valid_lo, valid_hi,
                                         s.scheme().background_code()),
                  s.scheme());
}

void check_fits(const Dims& shape, const Index3& offset, const Dims& size, const char* what) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (offset[a] + size[a] > shape[a]) {
      throw ConfigError(std::string(what) + ": window " + to_string(size) +
                        " exceeds shape " + to_string(shape));
    }
  }
}

}  // namespace

std::optional<BBox> foreground_bbox(const SegLabel& seg) {
  const auto& d = seg.shape();
  const auto bg = seg.scheme().background_code();
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  Index3 lo{kMax, kMax, kMax};
  Index3 hi{0, 0, 0};
  bool any = false;
  auto codes = seg.data();
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.z; ++z) {
    for (std::size_t y = 0; y < d.y; ++y) {
      for (std::size_t x = 0; x < d.x; ++x, ++i) {
        if (codes[i] == bg) continue;
        any = true;
        lo.x = std::min(lo.x, x);
        lo.y = std::min(lo.y, y);
        lo.z = std::min(lo.z, z);
        hi.x = std::max(hi.x, x + 1);
        hi.y = std::max(hi.y, y + 1);
        hi.z = std::max(hi.z, z + 1);
      }
    }
  }
  if (!any) return std::nullopt;
  return BBox{lo, hi};
}

BBox tumor_bbox(const SegLabel& seg, std::size_t margin) {
  auto tight = foreground_bbox(seg);
  if (!tight) throw NoTumorError("label has no foreground voxels");
  const auto& d = seg.shape();
  BBox box = *tight;
  for (std::size_t a = 0; a < 3; ++a) {
    box.lo[a] = box.lo[a] > margin ? box.lo[a] - margin : 0;
    box.hi[a] = std::min(d[a], box.hi[a] + margin);
  }
  return box;
}

BBox bbox_union(const BBox& a, const BBox& b) {
  BBox out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.lo[i] = std::min(a.lo[i], b.lo[i]);
    out.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return out;
}

PadAmounts pad_amounts_to_min(Dims region, Dims min_size) {
  PadAmounts pad;
  for (std::size_t a = 0; a < 3; ++a) {
    if (region[a] >= min_size[a]) continue;
    const auto total = min_size[a] - region[a];
    pad.low[a] = total / 2;
    pad.high[a] = total - total / 2;
  }
  return pad;
}

Volume pad_volume(const Volume& vol, const PadAmounts& pad, float fill) {
  const auto& d = vol.shape();
  Dims out{d.x + pad.low.x + pad.high.x, d.y + pad.low.y + pad.high.y,
           d.z + pad.low.z + pad.high.z};
  SignedIndex3 origin{-static_cast<std::int64_t>(pad.low.x),
                      -static_cast<std::int64_t>(pad.low.y),
                      -static_cast<std::int64_t>(pad.low.z)};
  return Volume(out, vol.spacing(), detail::extract_window(vol.data(), d, origin, out, fill));
}

SegLabel pad_label(const SegLabel& seg, const PadAmounts& pad) {
  const auto& d = seg.shape();
  Dims out{d.x + pad.low.x + pad.high.x, d.y + pad.low.y + pad.high.y,
           d.z + pad.low.z + pad.high.z};
  SignedIndex3 origin{-static_cast<std::int64_t>(pad.low.x),
                      -static_cast<std::int64_t>(pad.low.y),
                      -static_cast<std::int64_t>(pad.low.z)};
  return SegLabel(out,
                  detail::extract_window(seg.data(), d, origin, out,
                                         seg.scheme().background_code()),
                  seg.scheme());
}

Volume crop_volume(const Volume& vol, const Index3& offset, Dims size) {
  check_fits(vol.shape(), offset, size, "crop_volume");
  return window_volume(vol, to_signed(offset), size, {0, 0, 0}, full_extent(vol.shape()));
}

SegLabel crop_label(const SegLabel& seg, const Index3& offset, Dims size) {
  check_fits(seg.shape(), offset, size, "crop_label");
  return window_label(seg, to_signed(offset), size, {0, 0, 0}, full_extent(seg.shape()));
}

CaseBundle crop_case(const CaseBundle& c, const BBox& box) {
  const auto size = box.size();
  std::vector<NamedVolume> mods;
  mods.reserve(c.modalities().size());
  for (const auto& m : c.modalities()) {
    mods.push_back({m.name, crop_volume(m.volume, box.lo, size)});
  }
  return CaseBundle(c.case_id(), std::move(mods), crop_label(c.label(), box.lo, size));
}

PaddedRegion pad_to_min(const CaseBundle& region, Dims min_size) {
  const auto pad = pad_amounts_to_min(region.shape(), min_size);
  std::vector<NamedVolume> mods;
  mods.reserve(region.modalities().size());
  for (const auto& m : region.modalities()) mods.push_back({m.name, pad_volume(m.volume, pad)});
  return {CaseBundle(region.case_id(), std::move(mods), pad_label(region.label(), pad)), pad};
}

namespace {

OffsetRange admissible(Dims region, Dims size, const std::optional<OffsetRange>& allowed) {
  OffsetRange r;
  for (std::size_t a = 0; a < 3; ++a) {
    if (region[a] < size[a]) {
      throw ConfigError("crop: region " + to_string(region) + " smaller than " +
                        to_string(size));
    }
    r.lo[a] = 0;
    r.hi[a] = region[a] - size[a];
    if (allowed) {
      r.lo[a] = std::max(r.lo[a], allowed->lo[a]);
      r.hi[a] = std::min(r.hi[a], allowed->hi[a]);
      if (r.lo[a] > r.hi[a]) throw ConfigError("crop: empty admissible offset range");
    }
  }
  return r;
}

}  // namespace

Index3 crop_fixed(Dims region, Dims size, SeededRng& rng,
                  const std::optional<OffsetRange>& allowed) {
  const auto r = admissible(region, size, allowed);
  Index3 off;
  for (std::size_t a = 0; a < 3; ++a) {
    off[a] = r.lo[a] + static_cast<std::size_t>(rng.uniform_below(r.hi[a] - r.lo[a] + 1));
  }
  return off;
}

Index3 crop_center(Dims region, Dims size, const std::optional<OffsetRange>& allowed) {
  const auto r = admissible(region, size, allowed);
  Index3 off;
  for (std::size_t a = 0; a < 3; ++a) off[a] = r.lo[a] + (r.hi[a] - r.lo[a]) / 2;
  return off;
}

std::optional<Index3> relocate(const PatchProvenance& prov, const Index3& patch_voxel) {
  Index3 src;
  const auto bsize = prov.bbox.size();
  for (std::size_t a = 0; a < 3; ++a) {
    const auto padded = patch_voxel[a] + prov.crop_offset[a];
    if (padded < prov.pad.low[a]) return std::nullopt;
    const auto rel = padded - prov.pad.low[a];
    if (rel >= bsize[a]) return std::nullopt;
    src[a] = prov.bbox.lo[a] + rel;
  }
  return src;
}

PatchBundle extract_tumor_patch(const CaseBundle& c, const MixConfig& cfg, SeededRng& rng) {
  const auto tight = foreground_bbox(c.label());
  if (!tight) throw NoTumorError("case " + c.case_id() + " has no tumor voxels");
  const BBox box = tumor_bbox(c.label(), cfg.margin);
  const Dims bsize = box.size();
  const Dims& patch = cfg.patch_size;
  const PadAmounts pad = pad_amounts_to_min(bsize, patch);
  const Dims padded{bsize.x + pad.low.x + pad.high.x, bsize.y + pad.low.y + pad.high.y,
                    bsize.z + pad.low.z + pad.high.z};

  // Keep the whole tumor on every axis where it fits. On the other axes the
  // window must contain an anchor tumor voxel: random in Random mode, the
  // middle one in scan order in Center mode.
  const Dims tsize = tight->size();
  const bool oversized = tsize.x > patch.x || tsize.y > patch.y || tsize.z > patch.z;
  Index3 anchor{};
  if (oversized) {
    const auto codes = c.label().data();
    const auto bg = c.label().scheme().background_code();
    std::size_t n = 0;
    for (auto v : codes) n += v != bg;
    std::size_t pick = cfg.crop == CropMode::Random ? static_cast<std::size_t>(rng.uniform_below(n)) : n / 2;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (codes[i] == bg) continue;
      if (pick-- == 0) {
        anchor = unravel_index(c.shape(), i);
        break;
      }
    }
  }
  OffsetRange keep;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto t_lo = tight->lo[a] - box.lo[a] + pad.low[a];
    const auto t_hi = tight->hi[a] - box.lo[a] + pad.low[a];
    if (tsize[a] <= patch[a]) {
      keep.lo[a] = t_hi > patch[a] ? t_hi - patch[a] : 0;
      keep.hi[a] = t_lo;
    } else {
      const auto t = anchor[a] - box.lo[a] + pad.low[a];
      keep.lo[a] = t + 1 > patch[a] ? t + 1 - patch[a] : 0;
      keep.hi[a] = t;
    }
  }
  const Index3 offset = cfg.crop == CropMode::Random ? crop_fixed(padded, patch, rng, keep)
                                                     : crop_center(padded, patch, keep);

  SignedIndex3 origin;
  for (std::size_t a = 0; a < 3; ++a) {
    origin[a] = static_cast<std::int64_t>(box.lo[a] + offset[a]) -
                static_cast<std::int64_t>(pad.low[a]);
  }

  PatchBundle out;
  out.modalities.reserve(c.modalities().size());
  for (const auto& m : c.modalities()) {
    out.modalities.push_back({m.name, window_volume(m.volume, origin, patch, box.lo, box.hi)});
  }
  out.label = window_label(c.label(), origin, patch, box.lo, box.hi);
  out.onehot = encode_one_hot(out.label);
  out.provenance = {c.case_id(), c.shape(), box, pad, offset};
  return out;
}

PaddedCase pad_for_inference(const CaseBundle& c, Dims target) {
  PadAmounts pad;
  for (std::size_t a = 0; a < 3; ++a) {
    if (target[a] < c.shape()[a]) {
      throw ConfigError("pad_for_inference: target " + to_string(target) +
                        " smaller than case shape " + to_string(c.shape()));
    }
    pad.high[a] = target[a] - c.shape()[a];
  }
  std::vector<NamedVolume> mods;
  mods.reserve(c.modalities().size());
  for (const auto& m : c.modalities()) mods.push_back({m.name, pad_volume(m.volume, pad)});
  return {CaseBundle(c.case_id(), std::move(mods), pad_label(c.label(), pad)),
          InferencePad{c.shape(), target}};
}

Volume crop_back(const Volume& vol, const InferencePad& record) {
  if (vol.shape() != record.padded) throw ConfigError("crop_back: shape does not match record");
  return crop_volume(vol, {0, 0, 0}, record.original);
}

SegLabel crop_back(const SegLabel& seg, const InferencePad& record) {
  if (seg.shape() != record.padded) throw ConfigError("crop_back: shape does not match record");
  return crop_label(seg, {0, 0, 0}, record.original);
}

CaseBundle crop_back(const CaseBundle& c, const InferencePad& record) {
  return crop_case(c, BBox{{0, 0, 0}, {record.original.x, record.original.y, record.original.z}});
}

}  // namespace voxmix
