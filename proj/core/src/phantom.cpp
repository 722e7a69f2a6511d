#include <cmath>

#include "voxmix/error.hpp"
#include "voxmix/pipeline.hpp"

namespace voxmix {

void PhantomParams::validate() const {
  if (shape.count() == 0) throw ConfigError("phantom shape must be positive");
  if (!(spacing.x > 0 && spacing.y > 0 && spacing.z > 0)) {
    throw ConfigError("phantom spacing must be positive");
  }
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(brain_radii[a] > 0)) throw ConfigError("phantom brain radii must be positive");
    if (brain_radii[a] > static_cast<double>(shape[a]) / 2.0) {
      throw ConfigError("phantom brain does not fit in the volume");
    }
  }
  if (!(necrosis_radius > 0 && core_radius > necrosis_radius && edema_radius > core_radius)) {
    throw ConfigError("phantom tumor radii must satisfy 0 < necrosis < core < edema");
  }
  if (!(radius_jitter >= 0 && radius_jitter < 1)) {
    throw ConfigError("phantom radius_jitter must be in [0,1)");
  }
  const double rmin = std::min({brain_radii[0], brain_radii[1], brain_radii[2]});
  if (edema_radius * (1.0 + radius_jitter) >= rmin) {
    throw ConfigError("phantom tumor does not fit inside the brain");
  }
  if (modalities.empty()) throw ConfigError("phantom needs at least one modality");
  if (!(noise_sigma >= 0)) throw ConfigError("phantom noise_sigma must be >= 0");
}

CaseBundle generate_phantom(const PhantomParams& params, const std::string& case_id) {
  params.validate();
  SeededRng rng(params.seed);
  const auto& d = params.shape;

  std::array<double, 3> brain_c{};
  for (std::size_t a = 0; a < 3; ++a) brain_c[a] = (static_cast<double>(d[a]) - 1.0) / 2.0;

  // Tumor semi-axis scale per axis.
  std::array<double, 3> scale{};
  for (auto& s : scale) s = rng.uniform(1.0 - params.radius_jitter, 1.0 + params.radius_jitter);
  const double r_out = params.edema_radius * std::max({scale[0], scale[1], scale[2]});

  // Tumor centre: anywhere keeping the enclosing ball of the tumor inside the
  // ball inscribed in the brain ellipsoid.
  const double rmin = std::min({params.brain_radii[0], params.brain_radii[1], params.brain_radii[2]});
  const double room = rmin - r_out - 1.0;
  std::array<double, 3> tumor_c{};
  for (;;) {
    std::array<double, 3> u{};
    for (auto& v : u) v = rng.uniform(-1.0, 1.0);
    if (u[0] * u[0] + u[1] * u[1] + u[2] * u[2] > 1.0) continue;
    for (std::size_t a = 0; a < 3; ++a) tumor_c[a] = brain_c[a] + std::max(room, 0.0) * u[a];
    break;
  }

  const std::size_t n = d.count();
  std::vector<std::uint8_t> codes(n, 0);
  // 0 outside, 1 brain, 2 edema, 3 enhancing, 4 necrosis
  std::vector<std::uint8_t> tissue(n, 0);
  std::size_t i = 0;
  for (std::size_t z = 0; z < d.z; ++z) {
    for (std::size_t y = 0; y < d.y; ++y) {
      for (std::size_t x = 0; x < d.x; ++x, ++i) {
        const std::array<double, 3> p{static_cast<double>(x), static_cast<double>(y),
                                      static_cast<double>(z)};
        double b = 0.0, t = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
          const double db = (p[a] - brain_c[a]) / params.brain_radii[a];
          const double dt = (p[a] - tumor_c[a]) / scale[a];
          b += db * db;
          t += dt * dt;
        }
        if (b > 1.0) continue;
        const double r = std::sqrt(t);
        if (r <= params.necrosis_radius) {
          tissue[i] = 4;
          codes[i] = 1;
        } else if (r <= params.core_radius) {
          tissue[i] = 3;
          codes[i] = 4;
        } else if (r <= params.edema_radius) {
          tissue[i] = 2;
          codes[i] = 2;
        } else {
          tissue[i] = 1;
        }
      }
    }
  }

  std::vector<NamedVolume> mods;
  for (const auto& [name, tab] : params.modalities) {
    const std::array<double, 5> level{0.0, tab.brain, tab.edema, tab.enhancing, tab.necrosis};
    std::vector<float> data(n);
    for (std::size_t v = 0; v < n; ++v) {
      double value = level[tissue[v]];
      if (tissue[v] != 0 && params.noise_sigma > 0) value += params.noise_sigma * rng.normal();
      data[v] = static_cast<float>(value);
    }
    mods.push_back({name, Volume(d, params.spacing, std::move(data))});
  }
  return CaseBundle(case_id, std::move(mods), SegLabel(d, std::move(codes), LabelScheme::brats()));
}

}  // namespace voxmix
