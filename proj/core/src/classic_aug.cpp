#include "voxmix/classic_aug.hpp"

#include <algorithm>
#include <cmath>

#include "voxmix/error.hpp"

namespace voxmix {

Axis parse_axis(std::string_view name) {
  if (name == "x") return Axis::X;
  if (name == "y") return Axis::Y;
  if (name == "z") return Axis::Z;
  throw ConfigError("invalid axis '" + std::string(name) + "'");
}

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::X:
      return "x";
    case Axis::Y:
      return "y";
    case Axis::Z:
      return "z";
  }
  return "?";
}

void ElasticParams::validate() const {
  if (!(grid_spacing > 0) || !(max_displacement >= 0) || !(smoothing_sigma > 0)) {
    throw ConfigError("elastic parameters must be positive");
  }
}

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("augmentation probability must be in [0,1]");
}

std::size_t axis_index(Axis a) {
  const auto i = static_cast<int>(a);
  if (i < 0 || i > 2) throw ConfigError("invalid axis");
  return static_cast<std::size_t>(i);
}

// Generic index permutations over any canonical-order grid.
template <typename T>
std::vector<T> flip_data(std::span<const T> src, const Dims& d, std::size_t axis) {
  std::vector<T> out(src.size());
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.z; ++z) {
    for (std::size_t y = 0; y < d.y; ++y) {
      for (std::size_t x = 0; x < d.x; ++x, ++i) {
        Index3 p{x, y, z};
        p[axis] = d[axis] - 1 - p[axis];
        out[linear_index(d, p)] = src[i];
      }
    }
  }
  return out;
}

Dims rotated_dims(const Dims& d, std::size_t from, std::size_t to, int turns) {
  Dims out = d;
  if (turns % 2 == 1) std::swap(out[from], out[to]);
  return out;
}

template <typename T>
std::vector<T> rotate_once(std::span<const T> src, const Dims& d, std::size_t from,
                           std::size_t to) {
  const Dims nd = rotated_dims(d, from, to, 1);
  std::vector<T> out(src.size());
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.z; ++z) {
    for (std::size_t y = 0; y < d.y; ++y) {
      for (std::size_t x = 0; x < d.x; ++x, ++i) {
        Index3 p{x, y, z};
        Index3 q = p;
        q[from] = d[to] - 1 - p[to];
        q[to] = p[from];
        out[linear_index(nd, q)] = src[i];
      }
    }
  }
  return out;
}

int normalize_turns(int turns) {
  const int t = ((turns % 4) + 4) % 4;
  return t;
}

template <typename T>
std::vector<T> rotate_data(std::span<const T> src, Dims d, std::size_t from, std::size_t to,
                           int turns) {
  std::vector<T> cur(src.begin(), src.end());
  for (int t = 0; t < normalize_turns(turns); ++t) {
    cur = rotate_once(std::span<const T>(cur), d, from, to);
    d = rotated_dims(d, from, to, 1);
  }
  return cur;
}

void check_plane(Axis from, Axis to) {
  if (axis_index(from) == axis_index(to)) throw ConfigError("rotation needs two distinct axes");
}

Spacing permute_spacing(const Spacing& s, std::size_t from, std::size_t to, int turns) {
  std::array<double, 3> v{s.x, s.y, s.z};
  if (normalize_turns(turns) % 2 == 1) std::swap(v[from], v[to]);
  return {v[0], v[1], v[2]};
}

std::vector<NamedVolume> map_volumes(const std::vector<NamedVolume>& mods,
                                     const auto& fn) {
  std::vector<NamedVolume> out;
  out.reserve(mods.size());
  for (const auto& m : mods) out.push_back({m.name, fn(m.volume)});
  return out;
}

}  // namespace

Volume flip(const Volume& vol, Axis axis) {
  return Volume(vol.shape(), vol.spacing(), flip_data(vol.data(), vol.shape(), axis_index(axis)));
}

SegLabel flip(const SegLabel& seg, Axis axis) {
  return SegLabel(seg.shape(), flip_data(seg.data(), seg.shape(), axis_index(axis)),
                  seg.scheme());
}

BinaryMask flip(const BinaryMask& mask, Axis axis) {
  return BinaryMask(mask.shape(), flip_data(mask.data(), mask.shape(), axis_index(axis)));
}

CaseBundle flip(const CaseBundle& c, Axis axis) {
  return CaseBundle(c.case_id(), map_volumes(c.modalities(), [&](const Volume& v) {
                      return flip(v, axis);
                    }),
                    flip(c.label(), axis));
}

PatchBundle flip(const PatchBundle& p, Axis axis) {
  PatchBundle out;
  out.modalities = map_volumes(p.modalities, [&](const Volume& v) { return flip(v, axis); });
  out.label = flip(p.label, axis);
  out.onehot = encode_one_hot(out.label);
  out.provenance = p.provenance;
  return out;
}

Volume rotate90(const Volume& vol, Axis from, Axis to, int quarter_turns) {
  check_plane(from, to);
  const auto f = axis_index(from), t = axis_index(to);
  return Volume(rotated_dims(vol.shape(), f, t, normalize_turns(quarter_turns)),
                permute_spacing(vol.spacing(), f, t, quarter_turns),
                rotate_data(vol.data(), vol.shape(), f, t, quarter_turns));
}

SegLabel rotate90(const SegLabel& seg, Axis from, Axis to, int quarter_turns) {
  check_plane(from, to);
  const auto f = axis_index(from), t = axis_index(to);
  return SegLabel(rotated_dims(seg.shape(), f, t, normalize_turns(quarter_turns)),
                  rotate_data(seg.data(), seg.shape(), f, t, quarter_turns), seg.scheme());
}

BinaryMask rotate90(const BinaryMask& mask, Axis from, Axis to, int quarter_turns) {
  check_plane(from, to);
  const auto f = axis_index(from), t = axis_index(to);
  return BinaryMask(rotated_dims(mask.shape(), f, t, normalize_turns(quarter_turns)),
                    rotate_data(mask.data(), mask.shape(), f, t, quarter_turns));
}

CaseBundle rotate90(const CaseBundle& c, Axis from, Axis to, int quarter_turns) {
  return CaseBundle(c.case_id(), map_volumes(c.modalities(), [&](const Volume& v) {
                      return rotate90(v, from, to, quarter_turns);
                    }),
                    rotate90(c.label(), from, to, quarter_turns));
}

PatchBundle rotate90(const PatchBundle& p, Axis from, Axis to, int quarter_turns) {
  PatchBundle out;
  out.modalities = map_volumes(p.modalities, [&](const Volume& v) {
    return rotate90(v, from, to, quarter_turns);
  });
  out.label = rotate90(p.label, from, to, quarter_turns);
  out.onehot = encode_one_hot(out.label);
  out.provenance = p.provenance;
  return out;
}

Volume gaussian_noise(const Volume& vol, double sigma, SeededRng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (sigma == 0.0) return vol;
  auto src = vol.data();
  std::vector<float> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[i] = static_cast<float>(src[i] + sigma * rng.normal());
  }
  return Volume(vol.shape(), vol.spacing(), std::move(out));
}

Volume brightness(const Volume& vol, double scale) {
  if (!(scale > 0.0)) throw ConfigError("brightness scale must be > 0");
  auto src = vol.data();
  std::vector<float> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = static_cast<float>(src[i] * scale);
  return Volume(vol.shape(), vol.spacing(), std::move(out));
}

DisplacementField::DisplacementField(Dims shape, double grid_spacing, Dims nodes,
                                     std::vector<std::array<float, 3>> node_displacements)
    : shape_(shape), spacing_(grid_spacing), nodes_(nodes), disp_(std::move(node_displacements)) {
  if (disp_.size() != nodes_.count()) throw ConfigError("displacement node count mismatch");
}

std::array<double, 3> DisplacementField::at(std::size_t x, std::size_t y,
                                            std::size_t z) const noexcept {
  const std::array<double, 3> g{x / spacing_, y / spacing_, z / spacing_};
  std::array<std::size_t, 3> i0{};
  std::array<double, 3> f{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto last = nodes_[a] - 1;
    const auto base = std::min(static_cast<std::size_t>(g[a]), last);
    i0[a] = base == last && last > 0 ? last - 1 : base;
    f[a] = last == 0 ? 0.0 : std::clamp(g[a] - static_cast<double>(i0[a]), 0.0, 1.0);
  }
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    Index3 n{};
    for (std::size_t a = 0; a < 3; ++a) {
      const bool high = (corner >> a) & 1;
      if (high && nodes_[a] == 1) {
        w = 0.0;
        break;
      }
      n[a] = i0[a] + (high ? 1 : 0);
      w *= high ? f[a] : 1.0 - f[a];
    }
    if (w == 0.0) continue;
    const auto& d = disp_[linear_index(nodes_, n)];
    for (std::size_t a = 0; a < 3; ++a) out[a] += w * d[a];
  }
  return out;
}

double DisplacementField::max_magnitude() const noexcept {
  double best = 0.0;
  for (std::size_t z = 0; z < shape_.z; ++z) {
    for (std::size_t y = 0; y < shape_.y; ++y) {
      for (std::size_t x = 0; x < shape_.x; ++x) {
        const auto d = at(x, y, z);
        best = std::max(best, std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
      }
    }
  }
  return best;
}

DisplacementField sample_displacement_field(Dims shape, const ElasticParams& params,
                                            SeededRng& rng) {
  params.validate();
  Dims nodes;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto span = shape[a] > 0 ? static_cast<double>(shape[a] - 1) : 0.0;
    nodes[a] = static_cast<std::size_t>(std::ceil(span / params.grid_spacing)) + 1;
  }
  const double m = params.max_displacement;
  std::vector<std::array<double, 3>> raw(nodes.count());
  for (auto& d : raw) {
    for (auto& c : d) c = rng.uniform(-m, m);
  }

  // Separable Gaussian smoothing over the node grid, renormalized at borders.
  const double sigma = params.smoothing_sigma;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
  for (std::size_t axis = 0; axis < 3; ++axis) {
    std::vector<std::array<double, 3>> next(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const Index3 p = unravel_index(nodes, i);
      std::array<double, 3> acc{0, 0, 0};
      double wsum = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const auto q = static_cast<std::int64_t>(p[axis]) + k;
        if (q < 0 || q >= static_cast<std::int64_t>(nodes[axis])) continue;
        Index3 n = p;
        n[axis] = static_cast<std::size_t>(q);
        const double w = kernel[k + radius];
        const auto& v = raw[linear_index(nodes, n)];
        for (std::size_t c = 0; c < 3; ++c) acc[c] += w * v[c];
        wsum += w;
      }
      for (std::size_t c = 0; c < 3; ++c) next[i][c] = acc[c] / wsum;
    }
    raw = std::move(next);
  }

  // Clamp node vectors to the ball of radius m; trilinear blends of vectors
  // inside the ball stay inside it.
  std::vector<std::array<float, 3>> disp(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& v = raw[i];
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    const double s = norm > m && norm > 0 ? m / norm : 1.0;
    for (std::size_t c = 0; c < 3; ++c) {
      disp[i][c] = static_cast<float>(v[c] * s);
    }
    // float rounding can push the norm a hair above m
    double n2 = 0;
    for (std::size_t c = 0; c < 3; ++c) n2 += double(disp[i][c]) * disp[i][c];
    if (std::sqrt(n2) > m) {
      for (auto& c : disp[i]) c = std::nextafter(c, 0.0f);
    }
  }
  return DisplacementField(shape, params.grid_spacing, nodes, std::move(disp));
}

CaseBundle warp(const CaseBundle& c, const DisplacementField& field) {
  const auto& d = c.shape();
  if (field.shape() != d) throw ConfigError("displacement field shape differs from the case");
  const auto n = d.count();
  std::vector<std::vector<float>> out(c.modalities().size(), std::vector<float>(n, 0.0f));
  std::vector<std::uint8_t> labels(n, c.label().scheme().background_code());
  const auto codes = c.label().data();

  std::size_t i = 0;
  for (std::size_t z = 0; z < d.z; ++z) {
    for (std::size_t y = 0; y < d.y; ++y) {
      for (std::size_t x = 0; x < d.x; ++x, ++i) {
        const auto disp = field.at(x, y, z);
        const std::array<double, 3> p{x + disp[0], y + disp[1], z + disp[2]};

        // Nearest neighbour for the label.
        bool inside = true;
        Index3 nn;
        for (std::size_t a = 0; a < 3; ++a) {
          const double r = std::floor(p[a] + 0.5);
          if (r < 0 || r >= static_cast<double>(d[a])) {
            inside = false;
            break;
          }
          nn[a] = static_cast<std::size_t>(r);
        }
        if (inside) labels[i] = codes[linear_index(d, nn)];

        // Trilinear for intensities; out-of-range corners read as zero.
        std::array<std::int64_t, 3> base{};
        std::array<double, 3> f{};
        for (std::size_t a = 0; a < 3; ++a) {
          const double fl = std::floor(p[a]);
          base[a] = static_cast<std::int64_t>(fl);
          f[a] = p[a] - fl;
        }
        for (int corner = 0; corner < 8; ++corner) {
          double w = 1.0;
          bool valid = true;
          Index3 q;
          for (std::size_t a = 0; a < 3; ++a) {
            const bool high = (corner >> a) & 1;
            const auto v = base[a] + (high ? 1 : 0);
            w *= high ? f[a] : 1.0 - f[a];
            if (v < 0 || v >= static_cast<std::int64_t>(d[a])) {
              valid = false;
            } else {
              q[a] = static_cast<std::size_t>(v);
            }
          }
          if (!valid || w == 0.0) continue;
          const auto src = linear_index(d, q);
          for (std::size_t m = 0; m < out.size(); ++m) {
            out[m][i] += static_cast<float>(w * c.modalities()[m].volume[src]);
          }
        }
      }
    }
  }
  std::vector<NamedVolume> mods;
  for (std::size_t m = 0; m < out.size(); ++m) {
    const auto& src = c.modalities()[m];
    mods.push_back({src.name, Volume(d, src.volume.spacing(), std::move(out[m]))});
  }
  return CaseBundle(c.case_id(), std::move(mods), SegLabel(d, std::move(labels), c.label().scheme()));
}

CaseBundle elastic_distort(const CaseBundle& c, const ElasticParams& params, SeededRng& rng) {
  params.validate();
  if (params.max_displacement == 0.0) return c;
  return warp(c, sample_displacement_field(c.shape(), params, rng));
}

AugSpec AugSpec::defaults() {
  AugSpec spec;
  spec.ops = {FlipOp{Axis::X, 0.5},
              FlipOp{Axis::Y, 0.5},
              Rotate90Op{Axis::X, Axis::Y, {1, 2, 3}, 0.5},
              GaussianNoiseOp{0.1, 0.5},
              BrightnessOp{0.9, 1.1, 0.5},
              ElasticOp{ElasticParams{}, 0.3}};
  return spec;
}

void AugSpec::validate() const {
  for (const auto& op : ops) {
    std::visit(
        [](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          check_probability(o.probability);
          if constexpr (std::is_same_v<T, FlipOp>) {
            axis_index(o.axis);
          } else if constexpr (std::is_same_v<T, Rotate90Op>) {
            check_plane(o.from, o.to);
            if (o.quarter_turns.empty()) throw ConfigError("rotate90 needs quarter_turns");
            for (int t : o.quarter_turns) {
              if (t < 1 || t > 3) throw ConfigError("quarter_turns must be in {1,2,3}");
            }
          } else if constexpr (std::is_same_v<T, GaussianNoiseOp>) {
            if (!(o.sigma >= 0)) throw ConfigError("noise sigma must be >= 0");
          } else if constexpr (std::is_same_v<T, BrightnessOp>) {
            if (!(o.min_scale > 0) || !(o.max_scale >= o.min_scale)) {
              throw ConfigError("brightness scale range must be positive and ordered");
            }
          } else if constexpr (std::is_same_v<T, ElasticOp>) {
            o.params.validate();
          }
        },
        op);
  }
}

CaseBundle apply_augmentations(const CaseBundle& c, const AugSpec& spec, SeededRng& rng) {
  spec.validate();
  CaseBundle cur = c;
  for (const auto& op : spec.ops) {
    const double p = std::visit([](const auto& o) { return o.probability; }, op);
    // One draw per op decides whether it fires.
    if (!(rng.uniform() < p)) continue;
    cur = std::visit(
        [&](const auto& o) -> CaseBundle {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, FlipOp>) {
            return flip(cur, o.axis);
          } else if constexpr (std::is_same_v<T, Rotate90Op>) {
            const auto pick = rng.uniform_below(o.quarter_turns.size());
            return rotate90(cur, o.from, o.to, o.quarter_turns[pick]);
          } else if constexpr (std::is_same_v<T, GaussianNoiseOp>) {
            return CaseBundle(cur.case_id(), map_volumes(cur.modalities(), [&](const Volume& v) {
                                return gaussian_noise(v, o.sigma, rng);
                              }),
                              cur.label());
          } else if constexpr (std::is_same_v<T, BrightnessOp>) {
            const double s = rng.uniform(o.min_scale, o.max_scale);
            return CaseBundle(cur.case_id(), map_volumes(cur.modalities(), [&](const Volume& v) {
                                return brightness(v, s);
                              }),
                              cur.label());
          } else {
            return elastic_distort(cur, o.params, rng);
          }
        },
        op);
  }
  return cur;
}

}  // namespace voxmix
