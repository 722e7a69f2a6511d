#pragma once

// Batch commands behind the CLI. Each run_* reads one PipelineConfig, writes
// into config.output and never touches the input tree. Outputs are a pure
// function of (config, inputs): work is split into a fixed list first and
// every item draws from its own labelled random stream, so the worker count
// does not change a single byte.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxmix/classic_aug.hpp"
#include "voxmix/core_types.hpp"
#include "voxmix/rand_mix.hpp"

namespace voxmix {

struct TissueIntensities {
  double brain = 100.0;
  double edema = 100.0;
  double necrosis = 100.0;
  double enhancing = 100.0;
};

struct PhantomParams {
  Dims shape{240, 240, 155};
  Spacing spacing{};
  std::array<double, 3> brain_radii{96.0, 108.0, 65.0};
  // Nested tumor: necrosis inside an enhancing rim inside an edema shell.
  double edema_radius = 32.0;
  double core_radius = 20.0;
  double necrosis_radius = 12.0;
  // Each tumor semi-axis is scaled by a factor in [1 - j, 1 + j].
  double radius_jitter = 0.1;
  std::vector<std::pair<std::string, TissueIntensities>> modalities{
      {"T1", {100, 80, 50, 90}},
      {"T1ce", {100, 85, 50, 180}},
      {"T2", {80, 160, 170, 120}},
      {"Flair", {90, 170, 100, 130}}};
  double noise_sigma = 5.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError for degenerate geometry.
  void validate() const;
};

/// Synthetic brain-with-tumor case under the BraTS scheme. Deterministic in
/// params.seed.
CaseBundle generate_phantom(const PhantomParams& params, const std::string& case_id);

/// Shuffles the sorted ids with `seed` and deals them round-robin into k
/// folds (sizes differ by at most one; each fold sorted). Throws ConfigError
/// when k < 2 or k exceeds the case count.
std::vector<std::vector<std::string>> kfold_split(std::vector<std::string> case_ids,
                                                  std::size_t k, std::uint64_t seed);

enum class Command { Preprocess, Mix, Augment, Eval, Split, Phantom, Import };

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  MixConfig mix;
  std::size_t pairs = 0;

  AugSpec augment = AugSpec::defaults();
  std::size_t augment_copies = 1;

  std::size_t kfold = 5;

  PhantomParams phantom;
  std::size_t phantom_count = 6;

  std::filesystem::path pred;
  std::filesystem::path gt;
  bool allow_partial = false;

  LabelScheme scheme = LabelScheme::brats();

  /// Throws ConfigError when a field needed by `cmd` is missing or invalid.
  void validate(Command cmd) const;
};

/// Throws ConfigError on unknown keys or bad values.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& c);

struct RunSummary {
  std::size_t processed = 0;
  std::size_t skipped = 0;
};

RunSummary run_preprocess(const PipelineConfig& cfg);
RunSummary run_mix_batch(const PipelineConfig& cfg);
RunSummary run_augment(const PipelineConfig& cfg);
RunSummary run_eval(const PipelineConfig& cfg);
RunSummary run_split(const PipelineConfig& cfg);
RunSummary run_phantom(const PipelineConfig& cfg);
/// BraTS-style folders (<id>/<id>_t1.nii.gz, _t1ce, _t2, _flair, _seg) into
/// the case store.
RunSummary run_import(const PipelineConfig& cfg);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Rethrows the
/// exception of the lowest failing index after all threads finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace voxmix
