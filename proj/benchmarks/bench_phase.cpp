#include <benchmark/benchmark.h>

#include "fpp/eval.hpp"
#include "fpp/phase.hpp"
#include "fpp/sim.hpp"
#include "fpp/tpu.hpp"

using namespace fpp;

namespace {

SystemGeometry bench_geom(int cam) {
  SystemGeometry geom;
  geom.camera_width = cam;
  geom.camera_height = cam;
  geom.period_number = 64;
  return geom;
}

}  // namespace

static void BM_ExtractWrappedPhase(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const FringeImageSet set =
      phase::generate_patterns(side, side, 64, 4, 128.0, 100.0);
  for (auto _ : state) {
    PhaseMap out = phase::extract_wrapped_phase(set);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_ExtractWrappedPhase)->Arg(256)->Arg(1024);

static void BM_UnwrapHierarchical(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const SystemGeometry geom = bench_geom(side);
  const FrequencySet freqs = FrequencySet::of({1, 4, 16, 64});
  SceneParams params;
  params.radius = 3.0;
  const SceneSpec scene = sim::make_scene(SceneKind::Hemisphere, params, geom, 1);
  std::vector<PhaseMap> wrapped;
  for (int p : freqs.periods)
    wrapped.push_back(
        phase::extract_wrapped_phase(sim::render_scene(scene, geom, p, 4, 3)));
  for (auto _ : state) {
    tpu::HierarchicalResult r = tpu::unwrap_hierarchical(freqs, wrapped);
    benchmark::DoNotOptimize(r.absolute.values.data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_UnwrapHierarchical)->Arg(256)->Arg(512);

static void BM_PreprocessMask(benchmark::State& state) {
  const auto side = static_cast<int>(state.range(0));
  const SystemGeometry geom = bench_geom(side);
  SceneParams params;
  params.blob_count = 4;
  const SceneSpec scene =
      sim::make_scene(SceneKind::IsolatedBlobs, params, geom, 2);
  const ModulationMap mod =
      phase::extract_modulation(sim::render_scene(scene, geom, 64, 4, 3));
  for (auto _ : state) {
    Mask mask = eval::preprocess_mask(mod);
    benchmark::DoNotOptimize(mask.data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_PreprocessMask)->Arg(256)->Arg(512);
