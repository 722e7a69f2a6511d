#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"
#include "voxmix/error.hpp"
#include "voxmix/mixers.hpp"

using namespace voxmix;
using namespace voxmix::testing;

namespace {

// The image weight actually applied at voxel i, recovered from the output.
void expect_row_sums(const OneHotMatrix& y) {
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double s = 0;
    for (float v : y.row(i)) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

}  // namespace

TEST(MixMatrix, RowsReplicateTensor) {
  std::mt19937_64 g(1);
  const auto t = random_tensor({3, 2, 2}, g);
  const auto m = map_tensor_to_matrix(t, 4);
  ASSERT_EQ(m.rows(), t.size());
  ASSERT_EQ(m.cols(), 4u);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m.at(i, c), t[i]);
}

TEST(TensorMixup, MatchesScalarLoopOracleExactlyOnTinyPatches) {
  std::mt19937_64 g(2);
  const LabelScheme two({0, 1}, {"bg", "fg"}, {{"FG", {1}}});
  for (int t = 0; t < 200; ++t) {
    const Dims d{2, 2, 2};
    auto make = [&](const std::string& id) {
      PatchBundle p;
      p.modalities.push_back({"T1", random_volume(d, g)});
      p.label = random_seg(d, g, 0.5, two);
      p.onehot = encode_one_hot(p.label);
      p.provenance.case_id = id;
      return p;
    };
    const auto p1 = make("a"), p2 = make("b");
    const auto a = random_tensor(d, g);
    const auto s = tensormixup(p1, p2, a);
    const auto o = oracle_mix(p1, p2, a);
    for (std::size_t i = 0; i < d.count(); ++i) {
      EXPECT_EQ(s.modalities[0].volume[i], static_cast<float>(o.images[0][i]));
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(s.soft_label.at(i, c), static_cast<float>(o.labels[i * 2 + c]));
    }
  }
}

TEST(TensorMixup, LabelRowsFollowImageWeights) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 20; ++t) {
    const Dims d{6, 5, 4};
    const auto p1 = random_patch(d, g, "a"), p2 = random_patch(d, g, "b");
    const auto a = random_tensor(d, g);
    const auto s = tensormixup(p1, p2, a);
    expect_row_sums(s.soft_label);
    for (std::size_t i = 0; i < d.count(); ++i) {
      for (std::size_t m = 0; m < 4; ++m) {
        const float x1 = p1.modalities[m].volume[i], x2 = p2.modalities[m].volume[i];
        const float x = s.modalities[m].volume[i];
        EXPECT_GE(x, std::min(x1, x2));
        EXPECT_LE(x, std::max(x1, x2));
      }
      for (std::size_t c = 0; c < 4; ++c) {
        const double want = double(a[i]) * p1.onehot.at(i, c) + (1.0 - a[i]) * p2.onehot.at(i, c);
        EXPECT_NEAR(s.soft_label.at(i, c), want, 1e-6);
      }
      if (p1.label[i] == p2.label[i]) {
        for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(s.soft_label.at(i, c), p1.onehot.at(i, c));
      }
    }
  }
}

TEST(TensorMixup, SymmetricUnderSwapAndComplement) {
  std::mt19937_64 g(4);
  const Dims d{5, 5, 5};
  const auto p1 = random_patch(d, g, "a"), p2 = random_patch(d, g, "b");
  const auto a = random_tensor(d, g);
  std::vector<float> inv(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) inv[i] = 1.0f - a[i];
  const auto s = tensormixup(p1, p2, a);
  const auto r = tensormixup(p2, p1, MixTensor(d, inv));
  for (std::size_t i = 0; i < d.count(); ++i) {
    for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(s.modalities[m].volume[i], r.modalities[m].volume[i], 1e-6);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(s.soft_label.at(i, c), r.soft_label.at(i, c), 1e-6);
  }
}

TEST(Mixers, EndpointsReproduceSources) {
  std::mt19937_64 g(5);
  const Dims d{4, 3, 5};
  const auto p1 = random_patch(d, g, "a"), p2 = random_patch(d, g, "b");
  auto same = [&](const SyntheticCase& s, const PatchBundle& p) {
    for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(s.modalities[m].volume, p.modalities[m].volume);
    EXPECT_EQ(s.soft_label, p.onehot);
  };
  same(tensormixup(p1, p2, MixTensor::constant(d, 1.0f)), p1);
  same(tensormixup(p1, p2, MixTensor::constant(d, 0.0f)), p2);
  same(scalar_roi_mix(p1, p2, 1.0), p1);
  same(scalar_roi_mix(p1, p2, 0.0), p2);
  SeededRng rng(1);
  same(cutmix3d(p1, p2, 1.0, rng), p1);
  same(cutmix3d(p1, p2, 0.0, rng), p2);

  const CaseBundle c1("a", p1.modalities, p1.label), c2("b", p2.modalities, p2.label);
  auto whole = [&](const SyntheticCase& s, const CaseBundle& c) {
    for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(s.modalities[m].volume, c.modalities()[m].volume);
    EXPECT_EQ(s.soft_label, encode_one_hot(c.label()));
  };
  whole(mixup_whole(c1, c2, 1.0), c1);
  whole(mixup_whole(c1, c2, 0.0), c2);
}

TEST(Mixers, ScalarRoiEqualsConstantTensor) {
  std::mt19937_64 g(6);
  const Dims d{4, 4, 4};
  const auto p1 = random_patch(d, g, "a"), p2 = random_patch(d, g, "b");
  const auto s = scalar_roi_mix(p1, p2, 0.3);
  const auto t = tensormixup(p1, p2, MixTensor::constant(d, 0.3f));
  for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(s.modalities[m].volume, t.modalities[m].volume);
  EXPECT_EQ(s.soft_label, t.soft_label);
}

TEST(CutMix, BoxVolumeAndComposition) {
  std::mt19937_64 g(7);
  const Dims d{8, 8, 8};
  const auto p1 = random_patch(d, g, "a"), p2 = random_patch(d, g, "b");
  SeededRng rng(2);
  for (double lambda : {0.1, 0.5, 0.875, 0.99}) {
    const auto box = cutmix_box(d, lambda, rng);
    const auto side = std::llround(8.0 * std::cbrt(1.0 - lambda));
    EXPECT_EQ(box.size(), (Dims{std::size_t(side), std::size_t(side), std::size_t(side)}));
    EXPECT_LE(box.hi.x, 8u);
    const auto s = cutmix3d_with_box(p1, p2, box, lambda);
    expect_row_sums(s.soft_label);
    for (std::size_t i = 0; i < d.count(); ++i) {
      const bool in = box.contains(unravel_index(d, i));
      const auto& src = in ? p2 : p1;
      EXPECT_EQ(s.modalities[1].volume[i], src.modalities[1].volume[i]);
      for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(s.soft_label.at(i, c), src.onehot.at(i, c));
    }
  }
}

TEST(Mixers, RejectMismatchedInputs) {
  std::mt19937_64 g(8);
  const auto p1 = random_patch({4, 4, 4}, g), p2 = random_patch({4, 4, 3}, g);
  EXPECT_THROW(tensormixup(p1, p2, MixTensor::constant({4, 4, 4}, 0.5f)), ConfigError);
  auto p3 = random_patch({4, 4, 4}, g);
  p3.modalities[0].name = "PD";
  EXPECT_THROW(tensormixup(p1, p3, MixTensor::constant({4, 4, 4}, 0.5f)), ConfigError);
  EXPECT_THROW(tensormixup(p1, p1, MixTensor::constant({4, 4, 3}, 0.5f)), ConfigError);
  const CaseBundle c1("a", p1.modalities, p1.label);
  EXPECT_THROW(mixup_whole(c1, c1, 1.5), ConfigError);
}

TEST(MixupPatch, EqualsCropOfWholeMix) {
  std::mt19937_64 g(9);
  const Dims d{20, 18, 16};
  const auto c1 = random_case("a", random_blob_seg(d, g, {5, 5, 5}), g);
  const auto c2 = random_case("b", random_blob_seg(d, g, {5, 5, 5}), g);
  const Dims patch{8, 8, 8};
  const auto s = mixup_patch(c1, c2, 0.3, patch);
  ASSERT_EQ(s.shape(), patch);
  const auto whole = mixup_whole(c1, c2, 0.3);
  const auto focus = bbox_union(*foreground_bbox(c1.label()), *foreground_bbox(c2.label()));
  const auto origin = centered_window_origin(d, focus, patch);
  const auto crop = crop_synthetic(whole, origin, patch);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(s.modalities[m].volume, crop.modalities[m].volume);
  EXPECT_EQ(s.soft_label, crop.soft_label);
}

TEST(CenteredWindow, ClampsOrPads) {
  const auto o = centered_window_origin({10, 10, 4}, BBox{{0, 8, 0}, {2, 10, 4}}, {4, 4, 8});
  EXPECT_EQ(o[0], 0);
  EXPECT_EQ(o[1], 6);
  EXPECT_EQ(o[2], -2);
}
