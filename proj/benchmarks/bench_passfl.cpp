#include <benchmark/benchmark.h>

#include <vector>

#include "passfl/channel.hpp"
#include "passfl/driver.hpp"
#include "passfl/flsim.hpp"
#include "passfl/placement.hpp"
#include "passfl/solvers.hpp"

using namespace passfl;

namespace {

const Scenario& bench_scenario() {
  static const Scenario s = generate_scenario(1, 12, ScenarioTemplate{});
  return s;
}

}  // namespace

static void BM_Gain(benchmark::State& state) {
  const Scenario& s = bench_scenario();
  const std::vector<double> x = {3.0, 11.0, 19.0, 27.0};
  for (auto _ : state) {
    double total = 0.0;
    for (const auto& dev : s.devices) total += gain(dev, x, s, ArrayKind::kPinching);
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_Gain);

static void BM_UploadTime(benchmark::State& state) {
  const Scenario& s = bench_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(upload_time(1.0, 0.01, 1e-3, s));
}
BENCHMARK(BM_UploadTime);

static void BM_GaussSeidel(benchmark::State& state) {
  const Scenario& s = bench_scenario();
  const PlacementOptimizer opt(s, static_cast<int>(state.range(0)));
  const std::vector<double> w(s.devices.size(), 1.0);
  const Placement start = opt.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(opt.gauss_seidel(start, w).sweeps);
}
BENCHMARK(BM_GaussSeidel)->Arg(501)->Arg(2001)->Unit(benchmark::kMicrosecond);

static void BM_OptimizeRound(benchmark::State& state) {
  const Scenario& s = bench_scenario();
  OptimizerSettings o;
  o.mode = state.range(0) ? PlacementMode::kShared : PlacementMode::kPerUser;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_round(s, 0.5, o).tau_t);
}
BENCHMARK(BM_OptimizeRound)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Train(benchmark::State& state) {
  const SyntheticTask task = make_task(TaskSpec{}, 12, 1);
  const int rounds = static_cast<int>(state.range(0));
  const std::vector<std::vector<double>> masks(rounds, std::vector<double>(12, 1.0));
  const std::vector<double> lat(rounds, 0.1);
  LocalParams p;
  p.learn_rate = 1.0 / task.lipschitz();
  for (auto _ : state) benchmark::DoNotOptimize(train(task, masks, lat, p, 1).rounds.back().loss);
}
BENCHMARK(BM_Train)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
