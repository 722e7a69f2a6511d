#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "voxmix/core_types.hpp"

namespace voxmix::detail {

using SignedIndex3 = std::array<std::int64_t, 3>;

// Copies the `size` window whose low corner sits at `origin` (source
// coordinates, may be negative) out of `src`. Only voxels inside the
// half-open box [valid_lo, valid_hi) are read; everything else is `fill`.
template <typename T>
std::vector<T> extract_window(std::span<const T> src, const Dims& shape,
                              const SignedIndex3& origin, const Dims& size,
                              const Index3& valid_lo, const Index3& valid_hi, T fill) {
  std::vector<T> out(size.count(), fill);
  std::array<std::int64_t, 3> lo{}, hi{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto vlo = static_cast<std::int64_t>(std::min(valid_lo[a], shape[a]));
    const auto vhi = static_cast<std::int64_t>(std::min(valid_hi[a], shape[a]));
    // Patch-space range [lo, hi) that maps into the valid box.
    lo[a] = std::max<std::int64_t>(0, vlo - origin[a]);
    hi[a] = std::min<std::int64_t>(static_cast<std::int64_t>(size[a]), vhi - origin[a]);
    if (hi[a] <= lo[a]) return out;
  }
  const auto run = static_cast<std::size_t>(hi[0] - lo[0]);
  for (std::int64_t z = lo[2]; z < hi[2]; ++z) {
    for (std::int64_t y = lo[1]; y < hi[1]; ++y) {
      const auto sx = static_cast<std::size_t>(origin[0] + lo[0]);
      const auto sy = static_cast<std::size_t>(origin[1] + y);
      const auto sz = static_cast<std::size_t>(origin[2] + z);
      const T* from = src.data() + linear_index(shape, sx, sy, sz);
      T* to = out.data() + linear_index(size, static_cast<std::size_t>(lo[0]),
                                        static_cast<std::size_t>(y), static_cast<std::size_t>(z));
      std::copy_n(from, run, to);
    }
  }
  return out;
}

template <typename T>
std::vector<T> extract_window(std::span<const T> src, const Dims& shape,
                              const SignedIndex3& origin, const Dims& size, T fill) {
  return extract_window(src, shape, origin, size, Index3{0, 0, 0},
                        Index3{shape.x, shape.y, shape.z}, fill);
}

}  // namespace voxmix::detail
