#pragma once

#include <vector>

#include "voxmix/core_types.hpp"

namespace voxmix {

/// Exact squared Euclidean distance (mm^2) from every voxel centre to the
/// nearest set voxel of `features`, by separable lower-envelope passes.
/// Voxels are +inf when `features` is empty.
std::vector<double> squared_distance_transform(const BinaryMask& features, const Spacing& spacing);

}  // namespace voxmix
