#include "voxmix/distance_transform.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace voxmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One lower-envelope pass over a line of n samples spaced `step` mm apart.
void envelope_1d(const double* f, std::size_t n, double step, double* out, std::vector<std::size_t>& v,
                 std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  std::ptrdiff_t k = -1;
  auto pos = [step](std::size_t q) { return static_cast<double>(q) * step; };
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s = 0.0;
    while (k >= 0) {
      const auto p = v[static_cast<std::size_t>(k)];
      s = ((f[q] + pos(q) * pos(q)) - (f[p] + pos(p) * pos(p))) / (2.0 * (pos(q) - pos(p)));
      if (s > z[static_cast<std::size_t>(k)]) break;
      --k;
    }
    ++k;
    const auto uk = static_cast<std::size_t>(k);
    v[uk] = q;
    z[uk] = k == 0 ? -kInf : s;
    z[uk + 1] = kInf;
  }
  if (k < 0) {
    for (std::size_t q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[j + 1] < pos(q)) ++j;
    const double d = pos(q) - pos(v[j]);
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const BinaryMask& features, const Spacing& spacing) {
  const auto& d = features.shape();
  const auto n = d.count();
  std::vector<double> grid(n);
  auto bits = features.data();
  for (std::size_t i = 0; i < n; ++i) grid[i] = bits[i] ? 0.0 : kInf;

  std::vector<std::size_t> v;
  std::vector<double> z;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const std::size_t len = d[axis];
    if (len == 0) continue;
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.x : d.x * d.y);
    std::vector<double> line(len), result(len);
    // The two axes orthogonal to `axis`, with their strides.
    const std::size_t a1 = axis == 0 ? 1 : 0;
    const std::size_t a2 = axis == 2 ? 1 : 2;
    const std::array<std::size_t, 3> strides{1, d.x, d.x * d.y};
    for (std::size_t j = 0; j < d[a2]; ++j) {
      for (std::size_t i = 0; i < d[a1]; ++i) {
        const std::size_t start = i * strides[a1] + j * strides[a2];
        for (std::size_t q = 0; q < len; ++q) line[q] = grid[start + q * stride];
        envelope_1d(line.data(), len, spacing[axis], result.data(), v, z);
        for (std::size_t q = 0; q < len; ++q) grid[start + q * stride] = result[q];
      }
    }
  }
  return grid;
}

}  // namespace voxmix
