#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "voxmix/classic_aug.hpp"
#include "voxmix/error.hpp"

using namespace voxmix;
using namespace voxmix::testing;

TEST(Flip, InvolutionAndCoordinates) {
  std::mt19937_64 g(1);
  const auto v = random_volume({5, 4, 3}, g);
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const auto f = flip(v, a);
    EXPECT_EQ(flip(f, a), v);
    EXPECT_EQ(f.shape(), v.shape());
  }
  const auto f = flip(v, Axis::X);
  EXPECT_EQ(f.at(0, 1, 2), v.at(4, 1, 2));
}

TEST(Rotate90, FourTurnsIsIdentityAndShapesPermute) {
  std::mt19937_64 g(2);
  const auto v = random_volume({5, 4, 3}, g, -1, 1, {1.0, 2.0, 3.0});
  const auto r = rotate90(v, Axis::X, Axis::Y, 1);
  EXPECT_EQ(r.shape(), (Dims{4, 5, 3}));
  EXPECT_EQ(r.spacing().x, 2.0);
  EXPECT_EQ(r.spacing().y, 1.0);
  EXPECT_EQ(rotate90(r, Axis::X, Axis::Y, 3), v);
  EXPECT_EQ(rotate90(rotate90(v, Axis::Y, Axis::Z, 2), Axis::Y, Axis::Z, 2), v);
  EXPECT_THROW(rotate90(v, Axis::X, Axis::X, 1), ConfigError);
  EXPECT_EQ(rotate90(v, Axis::X, Axis::Y, 4), v);
}

TEST(Geometric, LabelAndMasksMoveTogether) {
  std::mt19937_64 g(3);
  const auto c = random_case("c", random_seg({6, 5, 4}, g, 0.5), g);
  for (const char* region : {"WT", "TC", "ET"}) {
    const auto m = region_mask(c.label(), region);
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      EXPECT_EQ(region_mask(flip(c, a).label(), region), flip(m, a));
    }
    for (int k : {1, 2, 3}) {
      EXPECT_EQ(region_mask(rotate90(c, Axis::X, Axis::Z, k).label(), region), rotate90(m, Axis::X, Axis::Z, k));
    }
  }
  const auto f = flip(c, Axis::Y);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(f.modalities()[m].volume, flip(c.modalities()[m].volume, Axis::Y));
}

TEST(Intensity, NeverTouchesLabel) {
  std::mt19937_64 g(4);
  const auto c = random_case("c", random_seg({6, 5, 4}, g), g);
  AugSpec spec;
  spec.ops = {GaussianNoiseOp{0.5, 1.0}, BrightnessOp{0.5, 1.5, 1.0}};
  SeededRng rng(1);
  const auto out = apply_augmentations(c, spec, rng);
  EXPECT_EQ(out.label(), c.label());
  EXPECT_NE(out.modalities()[0].volume, c.modalities()[0].volume);
  const auto b = brightness(c.modalities()[0].volume, 2.0);
  EXPECT_EQ(b[3], 2.0f * c.modalities()[0].volume[3]);
  EXPECT_EQ(gaussian_noise(c.modalities()[0].volume, 0.0, rng), c.modalities()[0].volume);
}

TEST(Augment, DeterministicUnderSeed) {
  std::mt19937_64 g(5);
  const auto c = random_case("c", random_blob_seg({24, 24, 16}, g, {8, 8, 8}), g);
  const auto spec = AugSpec::defaults();
  SeededRng a(9), b(9);
  const auto x = apply_augmentations(c, spec, a), y = apply_augmentations(c, spec, b);
  EXPECT_EQ(x.label(), y.label());
  for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(x.modalities()[m].volume, y.modalities()[m].volume);
}

TEST(Elastic, FieldBoundedAndZeroIsIdentity) {
  SeededRng rng(6);
  ElasticParams p{8.0, 3.0, 1.0};
  const auto field = sample_displacement_field({30, 20, 10}, p, rng);
  EXPECT_LE(field.max_magnitude(), 3.0 + 1e-9);
  std::mt19937_64 g(7);
  const auto c = random_case("c", random_seg({10, 9, 8}, g), g);
  p.max_displacement = 0.0;
  const auto same = elastic_distort(c, p, rng);
  EXPECT_EQ(same.label(), c.label());
  EXPECT_EQ(same.modalities()[1].volume, c.modalities()[1].volume);
}

TEST(Elastic, ZeroFieldWarpIsIdentityAndLabelsStayValid) {
  std::mt19937_64 g(8);
  const Dims d{12, 10, 8};
  const auto c = random_case("c", random_seg(d, g), g);
  const DisplacementField zero(d, 4.0, {4, 4, 3}, std::vector<std::array<float, 3>>(48, {0, 0, 0}));
  const auto w = warp(c, zero);
  EXPECT_EQ(w.label(), c.label());
  EXPECT_EQ(w.modalities()[0].volume, c.modalities()[0].volume);
  SeededRng rng(3);
  const auto e = elastic_distort(c, ElasticParams{4.0, 2.0, 1.0}, rng);
  for (auto code : e.label().data()) EXPECT_TRUE(LabelScheme::brats().contains(code));
}

TEST(AugSpec, Validates) {
  AugSpec s;
  s.ops = {GaussianNoiseOp{-1.0, 1.0}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.ops = {BrightnessOp{0.0, 1.0, 1.0}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.ops = {FlipOp{Axis::X, 1.5}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.ops = {ElasticOp{ElasticParams{0.0, 1.0, 1.0}, 1.0}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.ops = {Rotate90Op{Axis::X, Axis::Y, {0}, 1.0}};
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_NO_THROW(AugSpec::defaults().validate());
}
