#include "voxmix/mixers.hpp"

#include <algorithm>
#include <cmath>

#include "voxmix/error.hpp"
#include "window.hpp"

namespace voxmix {

MixMatrix::MixMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw ConfigError("mix matrix length mismatch");
}

MixMatrix map_tensor_to_matrix(const MixTensor& tensor, std::size_t k) {
  if (k < 1) throw ConfigError("map_tensor_to_matrix: k must be >= 1");
  const auto n = tensor.size();
  std::vector<float> data(n * k);
  auto w = tensor.data();
  for (std::size_t i = 0; i < n; ++i) std::fill_n(data.begin() + i * k, k, w[i]);
  return MixMatrix(n, k, std::move(data));
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("mix weight lambda must lie in [0,1], got " + std::to_string(lambda));
  }
}

void check_compatible(const std::vector<NamedVolume>& m1, const std::vector<NamedVolume>& m2,
                      const Dims& s1, const Dims& s2, const LabelScheme& k1,
                      const LabelScheme& k2) {
  if (s1 != s2) {
    throw ConfigError("cannot mix shapes " + to_string(s1) + " and " + to_string(s2));
  }
  if (m1.size() != m2.size()) throw ConfigError("cannot mix different modality sets");
  for (std::size_t i = 0; i < m1.size(); ++i) {
    if (m1[i].name != m2[i].name) {
      throw ConfigError("cannot mix modality " + m1[i].name + " with " + m2[i].name);
    }
  }
  if (!(k1 == k2)) throw ConfigError("cannot mix labels under different schemes");
}

// Per-voxel weight source: either a tensor or a constant.
struct Weights {
  const float* tensor = nullptr;
  float constant = 0.0f;
  float operator[](std::size_t i) const noexcept { return tensor ? tensor[i] : constant; }
};

std::vector<NamedVolume> mix_modalities(const std::vector<NamedVolume>& m1,
                                        const std::vector<NamedVolume>& m2, Weights w) {
  std::vector<NamedVolume> out;
  out.reserve(m1.size());
  for (std::size_t m = 0; m < m1.size(); ++m) {
    auto x1 = m1[m].volume.data();
    auto x2 = m2[m].volume.data();
    std::vector<float> x(x1.size());
    for (std::size_t v = 0; v < x.size(); ++v) x[v] = mix_value(w[v], x1[v], x2[v]);
    out.push_back({m1[m].name, Volume(m1[m].volume.shape(), m1[m].volume.spacing(), std::move(x))});
  }
  return out;
}

// Y = A* (.) Y1 + (1 - A*) (.) Y2, entry by entry.
OneHotMatrix mix_labels(const OneHotMatrix& y1, const OneHotMatrix& y2, const MixMatrix& a) {
  auto d1 = y1.data();
  auto d2 = y2.data();
  auto w = a.data();
  std::vector<float> y(d1.size());
  for (std::size_t e = 0; e < y.size(); ++e) y[e] = mix_value(w[e], d1[e], d2[e]);
  return OneHotMatrix(y1.rows(), y1.cols(), std::move(y));
}

OneHotMatrix mix_labels_scalar(const OneHotMatrix& y1, const OneHotMatrix& y2, float lambda) {
  auto d1 = y1.data();
  auto d2 = y2.data();
  std::vector<float> y(d1.size());
  for (std::size_t e = 0; e < y.size(); ++e) y[e] = mix_value(lambda, d1[e], d2[e]);
  return OneHotMatrix(y1.rows(), y1.cols(), std::move(y));
}

}  // namespace

SyntheticCase tensormixup(const PatchBundle& p1, const PatchBundle& p2, const MixTensor& weights) {
  check_compatible(p1.modalities, p2.modalities, p1.shape(), p2.shape(), p1.label.scheme(),
                   p2.label.scheme());
  if (weights.shape() != p1.shape()) {
    throw ConfigError("mix tensor shape " + to_string(weights.shape()) +
                      " differs from patch shape " + to_string(p1.shape()));
  }
  SyntheticCase out;
  out.modalities = mix_modalities(p1.modalities, p2.modalities, Weights{weights.data().data()});
  const auto a_star = map_tensor_to_matrix(weights, p1.label.scheme().class_count());
  out.soft_label = mix_labels(p1.onehot, p2.onehot, a_star);
  out.scheme = p1.label.scheme();
  out.lineage.case_i = p1.provenance.case_id;
  out.lineage.case_j = p2.provenance.case_id;
  out.lineage.method = MixMethod::TensorMixup;
  out.lineage.source_i = p1.provenance;
  out.lineage.source_j = p2.provenance;
  return out;
}

SyntheticCase mixup_whole(const CaseBundle& case_i, const CaseBundle& case_j, double lambda) {
  check_lambda(lambda);
  check_compatible(case_i.modalities(), case_j.modalities(), case_i.shape(), case_j.shape(),
                   case_i.label().scheme(), case_j.label().scheme());
  const auto w = static_cast<float>(lambda);
  SyntheticCase out;
  out.modalities = mix_modalities(case_i.modalities(), case_j.modalities(), Weights{nullptr, w});
  const auto yi = case_i.soft_label() ? *case_i.soft_label() : encode_one_hot(case_i.label());
  const auto yj = case_j.soft_label() ? *case_j.soft_label() : encode_one_hot(case_j.label());
  out.soft_label = mix_labels_scalar(yi, yj, w);
  out.scheme = case_i.label().scheme();
  out.lineage.case_i = case_i.case_id();
  out.lineage.case_j = case_j.case_id();
  out.lineage.method = MixMethod::Mixup;
  out.lineage.lambda = lambda;
  return out;
}

std::array<std::int64_t, 3> centered_window_origin(Dims volume, const BBox& focus, Dims patch) {
  std::array<std::int64_t, 3> origin{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto d = static_cast<std::int64_t>(volume[a]);
    const auto p = static_cast<std::int64_t>(patch[a]);
    if (d >= p) {
      const auto center2 = static_cast<std::int64_t>(focus.lo[a] + focus.hi[a]);
      origin[a] = std::clamp<std::int64_t>((center2 - p) / 2, 0, d - p);
    } else {
      origin[a] = -((p - d) / 2);
    }
  }
  return origin;
}

SyntheticCase crop_synthetic(const SyntheticCase& s, const std::array<std::int64_t, 3>& origin,
                             Dims size) {
  const auto& shape = s.shape();
  SyntheticCase out;
  out.scheme = s.scheme;
  out.lineage = s.lineage;
  out.lineage.window_origin = origin;
  for (const auto& m : s.modalities) {
    out.modalities.push_back(
        {m.name, Volume(size, m.volume.spacing(),
                        detail::extract_window(m.volume.data(), shape, origin, size, 0.0f))});
  }
  // Crop each class plane; outside the source the row is pure background.
  const std::size_t k = s.soft_label.cols();
  std::vector<float> rows(size.count() * k, 0.0f);
  std::vector<float> plane(shape.count());
  auto src = s.soft_label.data();
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = src[i * k + c];
    const float fill = c == 0 ? 1.0f : 0.0f;
    auto cropped = detail::extract_window(std::span<const float>(plane), shape, origin, size, fill);
    for (std::size_t i = 0; i < cropped.size(); ++i) rows[i * k + c] = cropped[i];
  }
  out.soft_label = OneHotMatrix(size.count(), k, std::move(rows));
  return out;
}

SyntheticCase mixup_patch(const CaseBundle& case_i, const CaseBundle& case_j, double lambda,
                          Dims patch) {
  check_lambda(lambda);
  check_compatible(case_i.modalities(), case_j.modalities(), case_i.shape(), case_j.shape(),
                   case_i.label().scheme(), case_j.label().scheme());
  const auto& shape = case_i.shape();
  const auto bi = foreground_bbox(case_i.label());
  const auto bj = foreground_bbox(case_j.label());
  BBox focus{{0, 0, 0}, {shape.x, shape.y, shape.z}};
  if (bi && bj) {
    focus = bbox_union(*bi, *bj);
  } else if (bi) {
    focus = *bi;
  } else if (bj) {
    focus = *bj;
  }
  const auto origin = centered_window_origin(shape, focus, patch);

  auto window_case = [&](const CaseBundle& c) {
    std::vector<NamedVolume> mods;
    for (const auto& m : c.modalities()) {
      mods.push_back({m.name, Volume(patch, m.volume.spacing(),
                                     detail::extract_window(m.volume.data(), shape, origin,
                                                            patch, 0.0f))});
    }
    SegLabel label(patch,
                   detail::extract_window(c.label().data(), shape, origin, patch,
                                          c.label().scheme().background_code()),
                   c.label().scheme());
    return CaseBundle(c.case_id(), std::move(mods), std::move(label));
  };
  auto out = mixup_whole(window_case(case_i), window_case(case_j), lambda);
  out.lineage.window_origin = origin;
  return out;
}

SyntheticCase scalar_roi_mix(const PatchBundle& p1, const PatchBundle& p2, double lambda) {
  check_lambda(lambda);
  auto out = tensormixup(p1, p2, MixTensor::constant(p1.shape(), static_cast<float>(lambda)));
  out.lineage.method = MixMethod::ScalarRoi;
  out.lineage.lambda = lambda;
  return out;
}

BBox cutmix_box(Dims patch, double lambda, SeededRng& rng) {
  check_lambda(lambda);
  const double side = std::cbrt(1.0 - lambda);
  BBox box;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto len = std::min<std::size_t>(
        patch[a], static_cast<std::size_t>(std::llround(static_cast<double>(patch[a]) * side)));
    const auto start = static_cast<std::size_t>(rng.uniform_below(patch[a] - len + 1));
    box.lo[a] = start;
    box.hi[a] = start + len;
  }
  return box;
}

SyntheticCase cutmix3d_with_box(const PatchBundle& p1, const PatchBundle& p2, const BBox& box,
                                double lambda) {
  check_lambda(lambda);
  check_compatible(p1.modalities, p2.modalities, p1.shape(), p2.shape(), p1.label.scheme(),
                   p2.label.scheme());
  const auto& shape = p1.shape();
  for (std::size_t a = 0; a < 3; ++a) {
    if (box.hi[a] > shape[a] || box.lo[a] > box.hi[a]) {
      throw ConfigError("cutmix box outside the patch");
    }
  }
  // Binary weight tensor: 1 keeps p1, 0 takes p2.
  std::vector<float> keep(shape.count(), 1.0f);
  for (std::size_t z = box.lo.z; z < box.hi.z; ++z) {
    for (std::size_t y = box.lo.y; y < box.hi.y; ++y) {
      for (std::size_t x = box.lo.x; x < box.hi.x; ++x) keep[linear_index(shape, x, y, z)] = 0.0f;
    }
  }
  auto out = tensormixup(p1, p2, MixTensor(shape, std::move(keep)));
  out.lineage.method = MixMethod::CutMix3d;
  out.lineage.lambda = lambda;
  out.lineage.cutmix_box = box;
  return out;
}

SyntheticCase cutmix3d(const PatchBundle& p1, const PatchBundle& p2, double lambda,
                       SeededRng& rng) {
  return cutmix3d_with_box(p1, p2, cutmix_box(p1.shape(), lambda, rng), lambda);
}

}  // namespace voxmix
