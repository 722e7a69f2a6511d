#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"
#include "voxmix/core_types.hpp"
#include "voxmix/error.hpp"

using namespace voxmix;
using namespace voxmix::testing;

TEST(Dims, LinearIndexIsXFastest) {
  const Dims d{3, 4, 5};
  EXPECT_EQ(linear_index(d, 0, 0, 0), 0u);
  EXPECT_EQ(linear_index(d, 1, 0, 0), 1u);
  EXPECT_EQ(linear_index(d, 0, 1, 0), 3u);
  EXPECT_EQ(linear_index(d, 0, 0, 1), 12u);
  for (std::size_t i = 0; i < d.count(); ++i) EXPECT_EQ(linear_index(d, unravel_index(d, i)), i);
}

TEST(Volume, RejectsBadInput) {
  EXPECT_THROW(Volume({2, 2, 2}, {}, std::vector<float>(7)), ConfigError);
  EXPECT_THROW(Volume({1, 1, 1}, {0, 1, 1}, {0.0f}), ConfigError);
  EXPECT_THROW(Volume({1, 1, 1}, {}, {std::numeric_limits<float>::quiet_NaN()}), DataError);
  EXPECT_THROW(Volume({1, 1, 1}, {}, {std::numeric_limits<float>::infinity()}), DataError);
}

TEST(LabelScheme, BratsDefaults) {
  const auto s = LabelScheme::brats();
  EXPECT_EQ(s.class_codes(), (std::vector<std::uint8_t>{0, 1, 2, 4}));
  EXPECT_EQ(s.index_of(4), 3);
  EXPECT_EQ(s.index_of(3), -1);
  ASSERT_NE(s.find_region("TC"), nullptr);
  EXPECT_EQ(s.find_region("TC")->codes, (std::vector<std::uint8_t>{1, 4}));
  EXPECT_EQ(LabelScheme(), s);
}

TEST(LabelScheme, RejectsInvalidSchemes) {
  EXPECT_THROW(LabelScheme({0}, {"bg"}, {}), ConfigError);
  EXPECT_THROW(LabelScheme({0, 0}, {"a", "b"}, {}), ConfigError);
  EXPECT_THROW(LabelScheme({0, 1}, {"a", "b"}, {{"R", {0, 1}}}), ConfigError);
  EXPECT_THROW(LabelScheme({0, 1}, {"a", "b"}, {{"R", {3}}}), ConfigError);
}

TEST(SegLabel, RejectsUnknownCode) {
  try {
    SegLabel({2, 1, 1}, {0, 3}, LabelScheme::brats());
    FAIL();
  } catch (const InvalidLabelCode& e) {
    EXPECT_EQ(e.voxel(), 1u);
    EXPECT_EQ(e.code(), 3);
  }
}

TEST(OneHot, RowsAreExactlyOneHotAndRoundTrip) {
  std::mt19937_64 g(1);
  for (int t = 0; t < 50; ++t) {
    const auto seg = random_seg({5, 4, 3}, g, 0.6);
    const auto oh = encode_one_hot(seg);
    ASSERT_EQ(oh.rows(), seg.size());
    ASSERT_EQ(oh.cols(), 4u);
    for (std::size_t i = 0; i < oh.rows(); ++i) {
      int ones = 0;
      for (float v : oh.row(i)) {
        EXPECT_TRUE(v == 0.0f || v == 1.0f);
        ones += v == 1.0f;
      }
      EXPECT_EQ(ones, 1);
      EXPECT_EQ(oh.at(i, seg.scheme().index_of(seg[i])), 1.0f);
    }
    EXPECT_EQ(decode_argmax(oh, seg.scheme(), seg.shape()), seg);
  }
}

TEST(OneHot, ValidatesRows) {
  EXPECT_THROW(OneHotMatrix(1, 2, {0.5f, 0.6f}), DataError);
  EXPECT_THROW(OneHotMatrix(1, 2, {-0.1f, 1.1f}), DataError);
  EXPECT_NO_THROW(OneHotMatrix(1, 2, {0.25f, 0.75f}));
}

TEST(OneHot, ArgmaxTiesGoToLowestIndex) {
  const OneHotMatrix m(1, 4, {0.0f, 0.5f, 0.0f, 0.5f});
  EXPECT_EQ(decode_argmax(m, LabelScheme::brats(), {1, 1, 1})[0], 1);
}

TEST(RegionMask, EtInsideTcInsideWt) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 50; ++t) {
    const auto seg = random_seg({6, 5, 4}, g, 0.7);
    const auto wt = region_mask(seg, "WT"), tc = region_mask(seg, "TC"), et = region_mask(seg, "ET");
    for (std::size_t i = 0; i < seg.size(); ++i) {
      if (et[i]) EXPECT_TRUE(tc[i]);
      if (tc[i]) EXPECT_TRUE(wt[i]);
    }
    EXPECT_EQ(wt, foreground_mask(seg));
  }
  EXPECT_THROW(region_mask(SegLabel::background({1, 1, 1}, LabelScheme::brats()), "XX"), ConfigError);
}

TEST(ZScore, MeanZeroUnitPopulationSd) {
  std::mt19937_64 g(3);
  const auto v = random_volume({7, 6, 5}, g, 10, 50);
  const auto z = zscore_normalize(v);
  EXPECT_FALSE(z.degenerate);
  double s = 0, s2 = 0;
  for (float x : z.volume.data()) {
    s += x;
    s2 += double(x) * x;
  }
  const double n = double(v.size());
  EXPECT_NEAR(s / n, 0.0, 1e-6);
  EXPECT_NEAR(s2 / n, 1.0, 1e-5);
}

TEST(ZScore, InvariantUnderAffineRescale) {
  // Inputs on a 2^-10 grid, power-of-two scales and integer shifts keep the
  // rescaled volume exact in float, so only the normaliser is under test.
  std::mt19937_64 g(4);
  std::uniform_int_distribution<int> q(-3072, 3072), ea(-3, 4), ub(-100, 100);
  for (int t = 0; t < 30; ++t) {
    std::vector<float> x(216), w(216);
    const float a = std::ldexp(1.0f, ea(g));
    const float b = float(ub(g));
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::ldexp(float(q(g)), -10);
      w[i] = a * x[i] + b;
    }
    const auto z1 = zscore_normalize(Volume({6, 6, 6}, {}, x)).volume;
    const auto z2 = zscore_normalize(Volume({6, 6, 6}, {}, w)).volume;
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(z1[i], z2[i], 1e-5);
  }
}

TEST(ZScore, ConstantVolumeIsDegenerate) {
  const auto z = zscore_normalize(Volume({2, 2, 2}, {}, std::vector<float>(8, 5.0f)));
  EXPECT_TRUE(z.degenerate);
  for (float x : z.volume.data()) EXPECT_EQ(x, 0.0f);
}

TEST(CaseBundle, Validates) {
  std::mt19937_64 g(5);
  const auto seg = random_seg({3, 3, 3}, g);
  const auto v = random_volume({3, 3, 3}, g);
  EXPECT_THROW(CaseBundle("c", {}, seg), DataError);
  EXPECT_THROW(CaseBundle("c", {{"T1", v}, {"T1", v}}, seg), DataError);
  EXPECT_THROW(CaseBundle("c", {{"T1", random_volume({3, 3, 2}, g)}}, seg), DataError);
  const CaseBundle c("c", {{"T1", v}}, seg);
  EXPECT_NE(c.find_modality("T1"), nullptr);
  EXPECT_EQ(c.find_modality("T2"), nullptr);
}
