#include <benchmark/benchmark.h>

#include "voxmix/mixers.hpp"
#include "voxmix/pipeline.hpp"
#include "voxmix/rand_mix.hpp"
#include "voxmix/roi_patch.hpp"
#include "voxmix/seg_metrics.hpp"

using namespace voxmix;

namespace {

const CaseBundle& phantom(std::uint64_t seed) {
  static const CaseBundle a = [] {
    PhantomParams p;
    p.seed = 1;
    return generate_phantom(p, "a");
  }();
  static const CaseBundle b = [] {
    PhantomParams p;
    p.seed = 2;
    return generate_phantom(p, "b");
  }();
  return seed == 1 ? a : b;
}

Dims cube(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return {n, n, n};
}

}  // namespace

static void BM_SampleMixTensor(benchmark::State& state) {
  const Dims d = cube(state);
  SeededRng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_mix_tensor(d, 0.5, rng));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * d.count()));
}
BENCHMARK(BM_SampleMixTensor)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_ExtractTumorPatch(benchmark::State& state) {
  const auto& c = phantom(1);
  MixConfig cfg;
  SeededRng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(extract_tumor_patch(c, cfg, rng));
}
BENCHMARK(BM_ExtractTumorPatch)->Unit(benchmark::kMillisecond);

static void BM_TensorMixup(benchmark::State& state) {
  MixConfig cfg;
  cfg.patch_size = cube(state);
  SeededRng rng(3);
  const auto p1 = extract_tumor_patch(phantom(1), cfg, rng);
  const auto p2 = extract_tumor_patch(phantom(2), cfg, rng);
  const auto a = sample_mix_tensor(cfg.patch_size, 0.5, rng);
  for (auto _ : state) benchmark::DoNotOptimize(tensormixup(p1, p2, a));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cfg.patch_size.count()));
}
BENCHMARK(BM_TensorMixup)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Hausdorff95Phantom(benchmark::State& state) {
  const auto p = region_mask(phantom(1).label(), "WT");
  const auto t = region_mask(phantom(2).label(), "WT");
  for (auto _ : state) benchmark::DoNotOptimize(hausdorff95(p, t, {}));
}
BENCHMARK(BM_Hausdorff95Phantom)->Unit(benchmark::kMillisecond);

static void BM_EvaluateCase(benchmark::State& state) {
  const auto& a = phantom(1).label();
  const auto& b = phantom(2).label();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_case(a, b));
}
BENCHMARK(BM_EvaluateCase)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
