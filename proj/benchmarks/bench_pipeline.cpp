#include <benchmark/benchmark.h>

#include <random>

#include "isac/dd_channel.hpp"
#include "isac/harness.hpp"
#include "isac/radar.hpp"
#include "isac/recovery.hpp"
#include "isac/scenario.hpp"
#include "isac/sparse_problem.hpp"

namespace {

using namespace isac;

const ExperimentConfig& desk() {
  static const ExperimentConfig cfg = desk_preset();
  return cfg;
}

void bm_modulate(benchmark::State& state) {
  const CommConfig& cfg = desk().comm;
  const FrameLayout layout = desk().layout_for(desk().eta);
  std::mt19937_64 rng(1);
  const std::vector<DdGrid> frame = random_frame(layout, cfg, rng);
  for (auto _ : state) benchmark::DoNotOptimize(modulate(frame, cfg));
}
BENCHMARK(bm_modulate);

void bm_apply_channel(benchmark::State& state) {
  const CommConfig& cfg = desk().comm;
  const FrameLayout layout = desk().layout_for(desk().eta);
  std::mt19937_64 rng(2);
  const std::vector<DdGrid> frame = random_frame(layout, cfg, rng);
  const std::vector<Eigen::VectorXcd> tx = modulate(frame, cfg);
  DdChannel chan = make_dd_channel(layout.guard_rows, cfg);
  for (int i = 0; i < 8; ++i)
    chan.at(i % layout.guard_rows, static_cast<int>(rng() % 8),
            static_cast<int>(rng() % 8)) = complex_gaussian(rng, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(apply_channel(tx, chan, cfg));
}
BENCHMARK(bm_apply_channel);

void bm_probe_dictionary(benchmark::State& state) {
  const CommConfig& cfg = desk().comm;
  const FrameLayout layout = desk().layout_for(desk().eta);
  std::mt19937_64 rng(3);
  const std::vector<DdGrid> frame = random_frame(layout, cfg, rng);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(probe_dictionary(frame, layout, cfg, threads));
}
BENCHMARK(bm_probe_dictionary)->Arg(1)->Arg(4);

void bm_radar_chain(benchmark::State& state) {
  const RadarConfig& cfg = desk().radar;
  std::vector<RadarPath> paths;
  for (int i = 0; i < 4; ++i) {
    RadarPath p;
    p.amplitude = cplx(1.0 / (1 + i), 0.2);
    p.delay_s = 4e-7 * (1 + i);
    p.velocity_mps = 25.0 * (i - 1);
    p.dir_cos = 0.2 * i - 0.3;
    p.is_static = (i == 3);
    if (p.is_static) p.velocity_mps = 0;
    paths.push_back(p);
  }
  std::mt19937_64 rng(4);
  const Cube cube = synthesize_cube(paths, cfg, 1e-3, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(process_cube(cube, cfg, desk().processing));
}
BENCHMARK(bm_radar_chain);

void bm_estimators(benchmark::State& state) {
  ExperimentConfig cfg = desk();
  cfg.scenes = 1;
  cfg.snr_db = {10.0};
  cfg.master_seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(sweep(cfg));
}
BENCHMARK(bm_estimators)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
