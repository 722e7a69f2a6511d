#pragma once

// Dice, sensitivity, specificity and the 95th-percentile Hausdorff distance,
// per evaluation region, plus batch aggregation.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxmix/core_types.hpp"

namespace voxmix {

struct OverlapCounts {
  std::size_t pred = 0;     // |P|
  std::size_t truth = 0;    // |T|
  std::size_t both = 0;     // |P and T|
  std::size_t neither = 0;  // |P0 and T0|
  std::size_t total = 0;
};

/// Throws ConfigError on shape mismatch.
OverlapCounts overlap_counts(const BinaryMask& pred, const BinaryMask& truth);

struct DiceResult {
  double value = 0.0;
  bool both_empty = false;  // value is 1 by convention
};

DiceResult dice(const BinaryMask& pred, const BinaryMask& truth);
/// nullopt when the truth mask is empty.
std::optional<double> sensitivity(const BinaryMask& pred, const BinaryMask& truth);
/// nullopt when the truth mask covers every voxel.
std::optional<double> specificity(const BinaryMask& pred, const BinaryMask& truth);

DiceResult dice(const OverlapCounts& c);
std::optional<double> sensitivity(const OverlapCounts& c);
std::optional<double> specificity(const OverlapCounts& c);

struct SurfacePointSet {
  std::vector<Index3> voxels;
  std::vector<std::array<double, 3>> points;  // mm
};

/// Mask voxels with a 6-neighbour outside the mask or beyond the border.
/// Throws DataError for an empty mask.
SurfacePointSet surface_points(const BinaryMask& mask, const Spacing& spacing);

/// Directed surface distances from every surface point of `from` to the
/// nearest surface point of `to`.
std::vector<double> directed_surface_distances(const BinaryMask& from, const BinaryMask& to,
                                               const Spacing& spacing);

/// Nearest-rank percentile of unsorted values; `pct` in (0, 100].
double nearest_rank_percentile(std::vector<double> values, double pct);

/// max of the two directed nearest-rank percentiles; nullopt when either mask
/// is empty. pct = 100 gives the classic Hausdorff distance.
std::optional<double> hausdorff(const BinaryMask& pred, const BinaryMask& truth,
                                const Spacing& spacing, double pct);

inline std::optional<double> hausdorff95(const BinaryMask& pred, const BinaryMask& truth,
                                         const Spacing& spacing) {
  return hausdorff(pred, truth, spacing, 95.0);
}

enum MetricFlag : std::uint32_t {
  kEmptyPred = 1u << 0,
  kEmptyGt = 1u << 1,
  kDiceBothEmpty = 1u << 2,
  kSensitivityUndefined = 1u << 3,
  kSpecificityUndefined = 1u << 4,
  kHd95Undefined = 1u << 5,
};

/// Tokens in the bit order above.
std::vector<std::string> flag_tokens(std::uint32_t flags);
/// Throws FormatError for an unknown token.
std::uint32_t parse_flag_token(std::string_view token);

struct RegionMetrics {
  std::string region;
  double dice = 0.0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> hd95_mm;
  std::uint32_t flags = 0;

  friend bool operator==(const RegionMetrics&, const RegionMetrics&) = default;
};

struct MetricsReport {
  std::string case_id;
  std::vector<RegionMetrics> regions;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Every metric for every region of the scheme. Throws ConfigError when the
/// shapes or schemes differ.
MetricsReport evaluate_case(const SegLabel& pred, const SegLabel& gt, const Spacing& spacing = {},
                            std::string case_id = {});

struct MetricStats {
  std::size_t count = 0;     // values included
  std::size_t excluded = 0;  // undefined values skipped
  std::optional<double> mean;
  std::optional<double> median;
  std::optional<double> q1;
  std::optional<double> q3;
  std::optional<double> min;
  std::optional<double> max;
};

/// Quantiles interpolate linearly between order statistics.
MetricStats describe(std::span<const std::optional<double>> values);

inline const std::array<std::string, 4>& metric_names() {
  static const std::array<std::string, 4> names{"dice", "sensitivity", "specificity", "hd95_mm"};
  return names;
}

struct ReportSummary {
  std::size_t cases = 0;
  // region -> metric -> stats, regions in first-seen order.
  std::vector<std::string> region_order;
  std::map<std::string, std::map<std::string, MetricStats>> stats;
};

/// Throws ConfigError for an empty list.
ReportSummary aggregate_reports(std::span<const MetricsReport> reports);

}  // namespace voxmix
