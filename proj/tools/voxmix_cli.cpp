// voxmix command line: phantom, import, preprocess, mix, augment, split, eval.
// Exit codes: 0 success, 1 configuration error, 2 data error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "voxmix/error.hpp"
#include "voxmix/log.hpp"
#include "voxmix/pipeline.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string input;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* sub, Common& c, bool with_input) {
  sub->add_option("--config", c.config, "JSON configuration file");
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  if (with_input) sub->add_option("--input", c.input, "input case directory");
}

voxmix::PipelineConfig resolve(const Common& c) {
  auto cfg = c.config.empty() ? voxmix::PipelineConfig{} : voxmix::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output = c.out;
  if (!c.input.empty()) cfg.input = c.input;
  if (c.workers) cfg.workers = *c.workers;
  cfg.mix.seed = cfg.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  voxmix::log::init_from_env();
  CLI::App app{"voxmix: volumetric mixing augmentation and segmentation metrics"};
  app.require_subcommand(1);

  Common common;
  auto* phantom = app.add_subcommand("phantom", "generate synthetic cases");
  add_common(phantom, common, false);
  std::optional<std::size_t> count;
  phantom->add_option("--count", count, "number of cases");

  auto* import = app.add_subcommand("import", "convert NIfTI case folders into the case store");
  add_common(import, common, true);

  auto* preprocess = app.add_subcommand("preprocess", "z-score every modality");
  add_common(preprocess, common, true);

  auto* mix = app.add_subcommand("mix", "generate a batch of mixed cases");
  add_common(mix, common, true);
  std::string method;
  std::optional<double> alpha;
  std::optional<std::size_t> pairs;
  mix->add_option("--method", method, "tensormixup | mixup | scalar_roi | cutmix3d");
  mix->add_option("--alpha", alpha, "Beta concentration");
  mix->add_option("--pairs", pairs, "number of pairs");

  auto* augment = app.add_subcommand("augment", "apply classic augmentations");
  add_common(augment, common, true);
  std::optional<std::size_t> copies;
  augment->add_option("--copies", copies, "augmented copies per case");

  auto* split = app.add_subcommand("split", "k-fold split of case ids");
  add_common(split, common, true);
  std::optional<std::size_t> k;
  split->add_option("--k", k, "number of folds");

  auto* eval = app.add_subcommand("eval", "per-region metrics of predictions against ground truth");
  add_common(eval, common, false);
  std::string pred, gt;
  bool allow_partial = false;
  eval->add_option("--pred", pred, "prediction case directory");
  eval->add_option("--gt", gt, "ground-truth case directory");
  eval->add_flag("--allow-partial", allow_partial, "evaluate the intersection when sets differ");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    auto cfg = resolve(common);
    voxmix::RunSummary r;
    std::string name;
    if (phantom->parsed()) {
      if (count) cfg.phantom_count = *count;
      r = voxmix::run_phantom(cfg);
      name = "phantom";
    } else if (import->parsed()) {
      r = voxmix::run_import(cfg);
      name = "import";
    } else if (preprocess->parsed()) {
      r = voxmix::run_preprocess(cfg);
      name = "preprocess";
    } else if (mix->parsed()) {
      if (!method.empty()) cfg.mix.method = voxmix::parse_mix_method(method);
      if (alpha) cfg.mix.alpha = *alpha;
      if (pairs) cfg.pairs = *pairs;
      r = voxmix::run_mix_batch(cfg);
      name = "mix";
    } else if (augment->parsed()) {
      if (copies) cfg.augment_copies = *copies;
      r = voxmix::run_augment(cfg);
      name = "augment";
    } else if (split->parsed()) {
      if (k) cfg.kfold = *k;
      r = voxmix::run_split(cfg);
      name = "split";
    } else {
      if (!pred.empty()) cfg.pred = pred;
      if (!gt.empty()) cfg.gt = gt;
      if (allow_partial) cfg.allow_partial = true;
      r = voxmix::run_eval(cfg);
      name = "eval";
    }
    std::printf("%s: %zu processed, %zu skipped\n", name.c_str(), r.processed, r.skipped);
    return 0;
  } catch (const voxmix::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const voxmix::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
