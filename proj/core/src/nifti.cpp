#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>

#include "voxmix/error.hpp"
#include "voxmix/storage.hpp"

namespace voxmix {

namespace fs = std::filesystem;

namespace {

constexpr int kHeaderSize = 348;
constexpr int kDtUint8 = 2;
constexpr int kDtInt16 = 4;
constexpr int kDtFloat32 = 16;
constexpr int kDtUint16 = 512;
// Refuse anything larger than this many voxels.
constexpr std::uint64_t kMaxVoxels = std::uint64_t{1} << 31;

struct GzCloser {
  void operator()(gzFile_s* f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

// gzread reads plain files transparently, so .nii and .nii.gz share a path.
GzHandle open_gz(const fs::path& path) {
  GzHandle f(gzopen(path.string().c_str(), "rb"));
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

void read_exact(gzFile_s* f, void* dst, std::size_t n, const fs::path& path) {
  auto* out = static_cast<unsigned char*>(dst);
  while (n > 0) {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
    const int got = gzread(f, out, chunk);
    if (got <= 0) throw FormatError(path.string() + ": truncated NIfTI file");
    out += got;
    n -= static_cast<std::size_t>(got);
  }
}

template <typename T>
T load(const unsigned char* p, bool swap) {
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), p, sizeof(T));
  if (swap) std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

std::size_t bytes_per_voxel(int datatype) {
  switch (datatype) {
    case kDtUint8:
      return 1;
    case kDtInt16:
    case kDtUint16:
      return 2;
    case kDtFloat32:
      return 4;
    default:
      return 0;
  }
}

NiftiHeader parse_header(const std::array<unsigned char, kHeaderSize>& h, const fs::path& path) {
  NiftiHeader out;
  const auto size_le = load<std::int32_t>(h.data(), false);
  const auto size_be = load<std::int32_t>(h.data(), true);
  if (size_le == kHeaderSize) {
    out.byte_swapped = false;
  } else if (size_be == kHeaderSize) {
    out.byte_swapped = true;
  } else {
    throw FormatError(path.string() + ": sizeof_hdr is not 348");
  }
  if (std::memcmp(h.data() + 344, "n+1\0", 4) != 0) {
    throw FormatError(path.string() + ": bad NIfTI-1 magic (expected \"n+1\")");
  }
  const bool sw = out.byte_swapped;
  std::array<std::int16_t, 8> dim{};
  for (std::size_t i = 0; i < 8; ++i) dim[i] = load<std::int16_t>(h.data() + 40 + 2 * i, sw);
  if (dim[0] < 3 || dim[0] > 7) {
    throw FormatError(path.string() + ": unsupported dimensionality " + std::to_string(dim[0]));
  }
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] != 1) throw FormatError(path.string() + ": only 3-D volumes are supported");
  }
  std::uint64_t voxels = 1;
  for (int i = 1; i <= 3; ++i) {
    if (dim[i] < 1) throw FormatError(path.string() + ": non-positive dimension");
    voxels *= static_cast<std::uint64_t>(dim[i]);
    if (voxels > kMaxVoxels) throw FormatError(path.string() + ": dimensions overflow");
  }
  out.shape = {static_cast<std::size_t>(dim[1]), static_cast<std::size_t>(dim[2]),
               static_cast<std::size_t>(dim[3])};
  out.datatype = load<std::int16_t>(h.data() + 70, sw);
  if (bytes_per_voxel(out.datatype) == 0) {
    throw FormatError(path.string() + ": unsupported NIfTI datatype " + std::to_string(out.datatype));
  }
  std::array<double, 3> px{};
  for (std::size_t i = 0; i < 3; ++i) {
    px[i] = std::abs(static_cast<double>(load<float>(h.data() + 76 + 4 * (i + 1), sw)));
    if (!(px[i] > 0) || !std::isfinite(px[i])) {
      throw FormatError(path.string() + ": invalid pixdim");
    }
  }
  out.spacing = {px[0], px[1], px[2]};
  out.vox_offset = load<float>(h.data() + 108, sw);
  if (!(out.vox_offset >= kHeaderSize)) throw FormatError(path.string() + ": invalid vox_offset");
  out.scl_slope = load<float>(h.data() + 112, sw);
  out.scl_inter = load<float>(h.data() + 116, sw);
  return out;
}

struct RawNifti {
  NiftiHeader header;
  std::vector<double> values;
};

RawNifti read_nifti(const fs::path& path) {
  auto f = open_gz(path);
  std::array<unsigned char, kHeaderSize> h{};
  read_exact(f.get(), h.data(), h.size(), path);
  RawNifti raw{parse_header(h, path), {}};
  const auto& hdr = raw.header;
  // Skip the extension area up to the data offset.
  const auto skip = static_cast<std::size_t>(hdr.vox_offset) - kHeaderSize;
  std::vector<unsigned char> discard(skip);
  if (skip > 0) read_exact(f.get(), discard.data(), skip, path);

  const auto n = hdr.shape.count();
  const auto bpv = bytes_per_voxel(hdr.datatype);
  std::vector<unsigned char> bytes(n * bpv);
  read_exact(f.get(), bytes.data(), bytes.size(), path);

  raw.values.resize(n);
  const bool sw = hdr.byte_swapped;
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = bytes.data() + i * bpv;
    switch (hdr.datatype) {
      case kDtUint8:
        raw.values[i] = p[0];
        break;
      case kDtInt16:
        raw.values[i] = load<std::int16_t>(p, sw);
        break;
      case kDtUint16:
        raw.values[i] = load<std::uint16_t>(p, sw);
        break;
      case kDtFloat32:
        raw.values[i] = load<float>(p, sw);
        break;
    }
  }
  return raw;
}

}  // namespace

NiftiHeader read_nifti_header(const fs::path& path) {
  auto f = open_gz(path);
  std::array<unsigned char, kHeaderSize> h{};
  read_exact(f.get(), h.data(), h.size(), path);
  return parse_header(h, path);
}

Volume import_nifti_volume(const fs::path& path) {
  auto raw = read_nifti(path);
  const auto& hdr = raw.header;
  const bool scaled = hdr.scl_slope != 0.0 && std::isfinite(hdr.scl_slope) &&
                      !(hdr.scl_slope == 1.0 && hdr.scl_inter == 0.0);
  std::vector<float> data(raw.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = scaled ? raw.values[i] * hdr.scl_slope + hdr.scl_inter : raw.values[i];
    data[i] = static_cast<float>(v);
  }
  return Volume(hdr.shape, hdr.spacing, std::move(data));
}

SegLabel import_nifti_label(const fs::path& path, const LabelScheme& scheme) {
  auto raw = read_nifti(path);
  std::vector<std::uint8_t> codes(raw.values.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const double v = raw.values[i];
    if (!(v >= 0 && v <= 255) || v != std::floor(v)) {
      throw InvalidLabelCode(i, std::isfinite(v) ? static_cast<int>(v) : -1);
    }
    codes[i] = static_cast<std::uint8_t>(v);
  }
  return SegLabel(raw.header.shape, std::move(codes), scheme);
}

}  // namespace voxmix
