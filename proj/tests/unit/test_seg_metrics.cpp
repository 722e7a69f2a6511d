#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "voxmix/classic_aug.hpp"
#include "voxmix/distance_transform.hpp"
#include "voxmix/error.hpp"
#include "voxmix/seg_metrics.hpp"

using namespace voxmix;
using namespace voxmix::testing;

namespace {

BinaryMask random_mask(Dims d, std::mt19937_64& g, double p) {
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> bits(d.count());
  for (auto& v : bits) v = b(g);
  return BinaryMask(d, std::move(bits));
}

}  // namespace

TEST(Overlap, MatchesBruteCounts) {
  std::mt19937_64 g(1);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_mask({6, 5, 4}, g, 0.3), q = random_mask({6, 5, 4}, g, 0.3);
    const auto c = brute_counts(p, q);
    const auto dc = dice(p, q);
    if (c.tp + c.fp + c.fn == 0) {
      EXPECT_TRUE(dc.both_empty);
      EXPECT_EQ(dc.value, 1.0);
    } else {
      EXPECT_EQ(dc.value, 2.0 * c.tp / double(2 * c.tp + c.fp + c.fn));
    }
    if (c.tp + c.fn) EXPECT_EQ(*sensitivity(p, q), c.tp / double(c.tp + c.fn));
    if (c.tn + c.fp) EXPECT_EQ(*specificity(p, q), c.tn / double(c.tn + c.fp));
    EXPECT_EQ(dice(p, q).value, dice(q, p).value);
  }
}

TEST(Overlap, DiceIdentities) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_mask({5, 5, 5}, g, 0.4), q = random_mask({5, 5, 5}, g, 0.4);
    if (p.none() || q.none()) continue;
    const auto c = overlap_counts(p, q);
    const double s = double(c.both) / double(c.pred);
    const double tt = *sensitivity(p, q);
    const double d = dice(p, q).value;
    if (s + tt > 0) EXPECT_NEAR(d, 2 * s * tt / (s + tt), 1e-12);
    EXPECT_EQ(d == 1.0, p == q);
    EXPECT_EQ(dice(p, p).value, 1.0);
  }
}

TEST(Overlap, EmptyConventions) {
  const BinaryMask e({2, 2, 2}, std::vector<std::uint8_t>(8, 0));
  const BinaryMask f({2, 2, 2}, std::vector<std::uint8_t>(8, 1));
  EXPECT_EQ(dice(e, f).value, 0.0);
  EXPECT_EQ(dice(f, e).value, 0.0);
  EXPECT_FALSE(sensitivity(f, e).has_value());
  EXPECT_FALSE(specificity(e, f).has_value());
  EXPECT_FALSE(hausdorff95(e, f, {}).has_value());
}

TEST(Surface, SixConnectedBoundaryWithBorderAsOutside) {
  std::vector<std::uint8_t> bits(27, 1);
  const BinaryMask full({3, 3, 3}, bits);
  EXPECT_EQ(surface_points(full, {}).points.size(), 26u);
  bits.assign(125, 0);
  const Dims d{5, 5, 5};
  for (std::size_t z = 1; z < 4; ++z)
    for (std::size_t y = 1; y < 4; ++y)
      for (std::size_t x = 1; x < 4; ++x) bits[linear_index(d, x, y, z)] = 1;
  const BinaryMask cube(d, bits);
  const auto s = surface_points(cube, {});
  EXPECT_EQ(s.points.size(), 26u);
  for (const auto& v : s.voxels) EXPECT_FALSE(v.x == 2 && v.y == 2 && v.z == 2);
  EXPECT_THROW(surface_points(BinaryMask(d, std::vector<std::uint8_t>(125, 0)), {}), DataError);
}

TEST(DistanceTransform, MatchesBruteForceAnisotropic) {
  std::mt19937_64 g(3);
  const Spacing sp{0.7, 1.3, 2.1};
  for (int t = 0; t < 20; ++t) {
    const Dims d{7, 6, 5};
    const auto m = random_mask(d, g, 0.05);
    if (m.none()) continue;
    const auto dt = squared_distance_transform(m, sp);
    for (std::size_t i = 0; i < d.count(); ++i) {
      const auto p = unravel_index(d, i);
      double best = 1e300;
      for (std::size_t j = 0; j < d.count(); ++j) {
        if (!m[j]) continue;
        const auto q = unravel_index(d, j);
        const double dx = (double(p.x) - double(q.x)) * sp.x, dy = (double(p.y) - double(q.y)) * sp.y,
                     dz = (double(p.z) - double(q.z)) * sp.z;
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      EXPECT_NEAR(dt[i], best, 1e-9);
    }
  }
}

TEST(Hausdorff, MatchesAllPairsOracle) {
  std::mt19937_64 g(4);
  for (int t = 0; t < 100; ++t) {
    const Dims d{10, 9, 8};
    const Spacing sp = (t % 2) ? Spacing{1, 1, 1} : Spacing{0.5, 1.25, 2.0};
    const auto p = random_mask(d, g, 0.1), q = random_mask(d, g, 0.1);
    for (double pct : {95.0, 100.0, 50.0}) {
      const auto got = hausdorff(p, q, sp, pct);
      const auto want = brute_hausdorff(p, q, sp, pct);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (got) EXPECT_NEAR(*got, *want, 1e-9);
    }
  }
}

TEST(Hausdorff, OrderingSymmetryAndZero) {
  std::mt19937_64 g(5);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_mask({8, 8, 8}, g, 0.2), q = random_mask({8, 8, 8}, g, 0.2);
    if (p.none() || q.none()) continue;
    const double h95 = *hausdorff95(p, q, {}), h100 = *hausdorff(p, q, {}, 100.0);
    EXPECT_LE(h95, h100);
    EXPECT_EQ(h95, *hausdorff95(q, p, {}));
    EXPECT_EQ(*hausdorff95(p, p, {}), 0.0);
  }
}

TEST(Hausdorff, KnownShift) {
  const Dims d{10, 3, 3};
  std::vector<std::uint8_t> a(d.count(), 0), b(d.count(), 0);
  a[linear_index(d, 2, 1, 1)] = 1;
  b[linear_index(d, 7, 1, 1)] = 1;
  EXPECT_DOUBLE_EQ(*hausdorff95(BinaryMask(d, a), BinaryMask(d, b), {2.0, 1, 1}), 10.0);
}

TEST(Metrics, InvariantUnderJointFlipsAndRotations) {
  std::mt19937_64 g(6);
  const Dims d{7, 6, 5};
  const auto p = random_mask(d, g, 0.2), q = random_mask(d, g, 0.2);
  const double h = *hausdorff95(p, q, {}), dc = dice(p, q).value;
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    EXPECT_NEAR(*hausdorff95(flip(p, a), flip(q, a), {}), h, 1e-12);
    EXPECT_EQ(dice(flip(p, a), flip(q, a)).value, dc);
  }
  for (int k : {1, 2, 3}) {
    const auto rp = rotate90(p, Axis::X, Axis::Y, k), rq = rotate90(q, Axis::X, Axis::Y, k);
    EXPECT_NEAR(*hausdorff95(rp, rq, {}), h, 1e-12);
    EXPECT_EQ(dice(rp, rq).value, dc);
  }
}

TEST(EvaluateCase, PerRegionAndFlags) {
  std::mt19937_64 g(7);
  const auto gt = random_seg({8, 8, 8}, g, 0.3);
  const auto r = evaluate_case(gt, gt, {}, "c1");
  ASSERT_EQ(r.regions.size(), 3u);
  for (const auto& m : r.regions) {
    EXPECT_EQ(m.dice, 1.0);
    EXPECT_EQ(*m.hd95_mm, 0.0);
    EXPECT_EQ(m.flags, 0u);
  }
  const auto empty = SegLabel::background({8, 8, 8}, LabelScheme::brats());
  const auto e = evaluate_case(empty, gt);
  EXPECT_EQ(e.regions[0].dice, 0.0);
  EXPECT_TRUE(e.regions[0].flags & kEmptyPred);
  EXPECT_TRUE(e.regions[0].flags & kHd95Undefined);
  const auto both = evaluate_case(empty, empty);
  EXPECT_EQ(both.regions[0].dice, 1.0);
  EXPECT_TRUE(both.regions[0].flags & kDiceBothEmpty);
  EXPECT_THROW(evaluate_case(empty, SegLabel::background({8, 8, 7}, LabelScheme::brats())), ConfigError);
}

TEST(Describe, QuartilesInterpolateAndSkipUndefined) {
  const std::vector<std::optional<double>> v{1.0, std::nullopt, 2.0, 3.0, 4.0};
  const auto s = describe(v);
  EXPECT_EQ(s.count, 4u);
  EXPECT_EQ(s.excluded, 1u);
  EXPECT_DOUBLE_EQ(*s.mean, 2.5);
  EXPECT_DOUBLE_EQ(*s.median, 2.5);
  EXPECT_DOUBLE_EQ(*s.q1, 1.75);
  EXPECT_DOUBLE_EQ(*s.q3, 3.25);
  EXPECT_EQ(*s.min, 1.0);
  EXPECT_EQ(*s.max, 4.0);
  const std::vector<std::optional<double>> none{std::nullopt};
  EXPECT_FALSE(describe(none).mean.has_value());
}

TEST(Percentile, NearestRank) {
  EXPECT_EQ(nearest_rank_percentile({5, 1, 3, 2, 4}, 95.0), 5.0);
  EXPECT_EQ(nearest_rank_percentile({5, 1, 3, 2, 4}, 40.0), 2.0);
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1;
  EXPECT_EQ(nearest_rank_percentile(v, 95.0), 95.0);
}
