#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "mdf/optsize.hpp"
#include "mdf/simlab.hpp"

namespace {

mdf::SimConfig config(mdf::Procedure procedure) {
  mdf::SimConfig c;
  c.M = 50;
  c.m0 = 25;
  c.effects.assign(25, 2.0);
  c.procedure = procedure;
  c.replicates = 2000;
  c.seed = 1;
  return c;
}

void BM_SimulateSerial(benchmark::State& state) {
  const mdf::SimConfig c = config(static_cast<mdf::Procedure>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdf::run_experiment_serial(c).rates);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.replicates));
}

void BM_SimulateParallel(benchmark::State& state) {
  const mdf::SimConfig c = config(static_cast<mdf::Procedure>(state.range(0)));
  mdf::RunOptions options;
  options.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(mdf::run_experiment(c, options).rates);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.replicates));
}

std::vector<double> grid() {
  std::vector<double> g(100);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::exp(std::log(1e-4) + (std::log(0.99) - std::log(1e-4)) * static_cast<double>(i) / 99.0);
  }
  return g;
}

void BM_OptimalFamily(benchmark::State& state) {
  const mdf::RocModel roc({3.0, 0.5, 1.0, 2.0, 1.5, 2.5, 0.8, 1.2});
  const std::vector<double> g = grid();
  mdf::FamilyOptions options;
  options.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(mdf::build_optimal_family(roc, g, options).max_repair);
}

}  // namespace

// Procedure 0 = dagger, 1 = star.
BENCHMARK(BM_SimulateSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)
    ->ArgsProduct({{0, 1}, {1, 2, 4}})
    ->ArgNames({"proc", "workers"})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OptimalFamily)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
