#include <vector>

#include <benchmark/benchmark.h>

#include <liekf/em.hpp>
#include <liekf/monte_carlo.hpp>

namespace {

using namespace liekf;

void BM_Hamilton(benchmark::State& state) {
  Quaternion p(0.9, 0.1, -0.3, 0.2), q(0.5, 0.5, 0.5, 0.5);
  for (auto _ : state) {
    p = hamilton(p, q);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_Hamilton);

struct Fixture {
  Scenario sc;
  Trajectory traj;
  RunData run;
  Fixture() {
    sc.trajectory.duration = 5.0;
    traj = generate_trajectory(sc.trajectory);
    run = prepare_run(sc, traj, 0);
  }
};

void BM_FilterStep(benchmark::State& state) {
  const Fixture f;
  const FilterParams params = f.sc.filter_true_params();
  FilterState s = f.run.init;
  std::size_t k = 0;
  for (auto _ : state) {
    s = step(s, f.run.samples[k], f.sc.refs, params).state;
    k = (k + 1) % f.run.samples.size();
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_FilterStep);

void BM_EmWindow(benchmark::State& state) {
  const Fixture f;
  EmConfig cfg;
  cfg.window_length = static_cast<std::size_t>(state.range(0));
  const FilterParams theta0 = f.sc.theta0_params({400.0, 200.0});
  const std::span<const ImuSample> window = std::span(f.run.samples).first(cfg.window_length);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_em(window, f.run.init, theta0, f.sc.refs, cfg));
  }
}
BENCHMARK(BM_EmWindow)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
