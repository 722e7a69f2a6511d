#include "voxmix/seg_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voxmix/distance_transform.hpp"
#include "voxmix/error.hpp"

namespace voxmix {

OverlapCounts overlap_counts(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.shape() != truth.shape()) {
    throw ConfigError("mask shapes differ: " + to_string(pred.shape()) + " vs " +
                      to_string(truth.shape()));
  }
  OverlapCounts c;
  auto p = pred.data();
  auto t = truth.data();
  c.total = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.pred += p[i];
    c.truth += t[i];
    c.both += p[i] & t[i];
  }
  c.neither = c.total - c.pred - c.truth + c.both;
  return c;
}

DiceResult dice(const OverlapCounts& c) {
  if (c.pred + c.truth == 0) return {1.0, true};
  return {2.0 * static_cast<double>(c.both) / static_cast<double>(c.pred + c.truth), false};
}

std::optional<double> sensitivity(const OverlapCounts& c) {
  if (c.truth == 0) return std::nullopt;
  return static_cast<double>(c.both) / static_cast<double>(c.truth);
}

std::optional<double> specificity(const OverlapCounts& c) {
  const auto background = c.total - c.truth;
  if (background == 0) return std::nullopt;
  return static_cast<double>(c.neither) / static_cast<double>(background);
}

DiceResult dice(const BinaryMask& pred, const BinaryMask& truth) {
  return dice(overlap_counts(pred, truth));
}

std::optional<double> sensitivity(const BinaryMask& pred, const BinaryMask& truth) {
  return sensitivity(overlap_counts(pred, truth));
}

std::optional<double> specificity(const BinaryMask& pred, const BinaryMask& truth) {
  return specificity(overlap_counts(pred, truth));
}

namespace {

bool is_surface(const BinaryMask& mask, const Index3& p) {
  const auto& d = mask.shape();
  for (std::size_t a = 0; a < 3; ++a) {
    if (p[a] == 0 || p[a] + 1 == d[a]) return true;
    Index3 lo = p, hi = p;
    --lo[a];
    ++hi[a];
    if (!mask[linear_index(d, lo)] || !mask[linear_index(d, hi)]) return true;
  }
  return false;
}

// Surface voxels of `mask` restricted to `box`, written as a mask over `box`.
BinaryMask surface_mask_in_box(const BinaryMask& mask, const Index3& lo, const Dims& box) {
  const auto& d = mask.shape();
  std::vector<std::uint8_t> bits(box.count(), 0);
  std::size_t i = 0;
  for (std::size_t z = 0; z < box.z; ++z) {
    for (std::size_t y = 0; y < box.y; ++y) {
      for (std::size_t x = 0; x < box.x; ++x, ++i) {
        const Index3 p{lo.x + x, lo.y + y, lo.z + z};
        if (mask[linear_index(d, p)] && is_surface(mask, p)) bits[i] = 1;
      }
    }
  }
  return BinaryMask(box, std::move(bits));
}

std::optional<std::pair<Index3, Index3>> union_extent(const BinaryMask& a, const BinaryMask& b) {
  const auto& d = a.shape();
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  Index3 lo{kMax, kMax, kMax}, hi{0, 0, 0};
  bool any = false;
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.z; ++z) {
    for (std::size_t y = 0; y < d.y; ++y) {
      for (std::size_t x = 0; x < d.x; ++x, ++i) {
        if (!a[i] && !b[i]) continue;
        any = true;
        lo = {std::min(lo.x, x), std::min(lo.y, y), std::min(lo.z, z)};
        hi = {std::max(hi.x, x + 1), std::max(hi.y, y + 1), std::max(hi.z, z + 1)};
      }
    }
  }
  if (!any) return std::nullopt;
  return std::make_pair(lo, hi);
}

}  // namespace

SurfacePointSet surface_points(const BinaryMask& mask, const Spacing& spacing) {
  const auto& d = mask.shape();
  SurfacePointSet out;
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.z; ++z) {
    for (std::size_t y = 0; y < d.y; ++y) {
      for (std::size_t x = 0; x < d.x; ++x, ++i) {
        if (!mask[i]) continue;
        const Index3 p{x, y, z};
        if (!is_surface(mask, p)) continue;
        out.voxels.push_back(p);
        out.points.push_back({x * spacing.x, y * spacing.y, z * spacing.z});
      }
    }
  }
  if (out.voxels.empty()) throw DataError("surface_points: empty mask");
  return out;
}

std::vector<double> directed_surface_distances(const BinaryMask& from, const BinaryMask& to,
                                               const Spacing& spacing) {
  if (from.shape() != to.shape()) throw ConfigError("mask shapes differ");
  const auto extent = union_extent(from, to);
  if (!extent) return {};
  const auto [lo, hi] = *extent;
  const Dims box{hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
  // Every surface voxel of either mask lies in the union box, so the
  // transform restricted to the box is exact.
  const auto target = surface_mask_in_box(to, lo, box);
  const auto source = surface_mask_in_box(from, lo, box);
  const auto dist2 = squared_distance_transform(target, spacing);
  std::vector<double> out;
  auto bits = source.data();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out.push_back(std::sqrt(dist2[i]));
  }
  return out;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ConfigError("percentile of an empty set");
  if (!(pct > 0.0 && pct <= 100.0)) throw ConfigError("percentile must be in (0, 100]");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

std::optional<double> hausdorff(const BinaryMask& pred, const BinaryMask& truth,
                                const Spacing& spacing, double pct) {
  if (pred.shape() != truth.shape()) throw ConfigError("mask shapes differ");
  if (pred.none() || truth.none()) return std::nullopt;
  const double forward = nearest_rank_percentile(directed_surface_distances(pred, truth, spacing), pct);
  const double backward = nearest_rank_percentile(directed_surface_distances(truth, pred, spacing), pct);
  return std::max(forward, backward);
}

std::vector<std::string> flag_tokens(std::uint32_t flags) {
  static const std::array<const char*, 6> names{"empty_pred",
                                                "empty_gt",
                                                "dice_both_empty",
                                                "sensitivity_undefined",
                                                "specificity_undefined",
                                                "hd95_undefined"};
  std::vector<std::string> out;
  for (std::size_t b = 0; b < names.size(); ++b) {
    if (flags & (1u << b)) out.emplace_back(names[b]);
  }
  return out;
}

std::uint32_t parse_flag_token(std::string_view token) {
  for (std::uint32_t b = 0; b < 6; ++b) {
    const auto names = flag_tokens(1u << b);
    if (names.front() == token) return 1u << b;
  }
  throw FormatError("unknown metric flag '" + std::string(token) + "'");
}

MetricsReport evaluate_case(const SegLabel& pred, const SegLabel& gt, const Spacing& spacing,
                            std::string case_id) {
  if (pred.shape() != gt.shape()) {
    throw ConfigError("prediction shape " + to_string(pred.shape()) + " differs from truth " +
                      to_string(gt.shape()));
  }
  if (!(pred.scheme() == gt.scheme())) throw ConfigError("prediction and truth schemes differ");
  MetricsReport report;
  report.case_id = std::move(case_id);
  for (const auto& region : gt.scheme().regions()) {
    const auto p = region_mask(pred, region.name);
    const auto t = region_mask(gt, region.name);
    const auto counts = overlap_counts(p, t);
    RegionMetrics m;
    m.region = region.name;
    const auto d = dice(counts);
    m.dice = d.value;
    m.sensitivity = sensitivity(counts);
    m.specificity = specificity(counts);
    if (counts.pred == 0) m.flags |= kEmptyPred;
    if (counts.truth == 0) m.flags |= kEmptyGt;
    if (d.both_empty) m.flags |= kDiceBothEmpty;
    if (!m.sensitivity) m.flags |= kSensitivityUndefined;
    if (!m.specificity) m.flags |= kSpecificityUndefined;
    if (counts.pred > 0 && counts.truth > 0) m.hd95_mm = hausdorff95(p, t, spacing);
    if (!m.hd95_mm) m.flags |= kHd95Undefined;
    report.regions.push_back(std::move(m));
  }
  return report;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

MetricStats describe(std::span<const std::optional<double>> values) {
  MetricStats s;
  std::vector<double> v;
  for (const auto& x : values) {
    if (x) {
      v.push_back(*x);
    } else {
      ++s.excluded;
    }
  }
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  s.median = quantile_sorted(v, 0.5);
  s.q1 = quantile_sorted(v, 0.25);
  s.q3 = quantile_sorted(v, 0.75);
  s.min = v.front();
  s.max = v.back();
  return s;
}

ReportSummary aggregate_reports(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw ConfigError("aggregate_reports: no reports");
  ReportSummary summary;
  summary.cases = reports.size();
  std::map<std::string, std::map<std::string, std::vector<std::optional<double>>>> columns;
  for (const auto& r : reports) {
    for (const auto& m : r.regions) {
      if (!columns.contains(m.region)) summary.region_order.push_back(m.region);
      auto& col = columns[m.region];
      col["dice"].push_back(m.dice);
      col["sensitivity"].push_back(m.sensitivity);
      col["specificity"].push_back(m.specificity);
      col["hd95_mm"].push_back(m.hd95_mm);
    }
  }
  for (const auto& [region, metrics] : columns) {
    for (const auto& [name, values] : metrics) summary.stats[region][name] = describe(values);
  }
  return summary;
}

}  // namespace voxmix
