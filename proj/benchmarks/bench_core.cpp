#include <benchmark/benchmark.h>

#include <vector>

#include "colltime/exact.hpp"
#include "colltime/lattice.hpp"
#include "colltime/montecarlo.hpp"
#include "colltime/polymer.hpp"
#include "colltime/replica.hpp"
#include "colltime/rng.hpp"

using namespace colltime;

static void BM_PhiloxFill(benchmark::State& state) {
  CounterRng rng({1, 0, 0});
  std::vector<std::uint64_t> buf(2 * 1024);
  for (auto _ : state) {
    rng.fill(buf.data(), 1024);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetBytesProcessed(state.iterations() * buf.size() * sizeof(std::uint64_t));
}
BENCHMARK(BM_PhiloxFill);

static void BM_KernelTable(benchmark::State& state) {
  const auto N = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel_table(N, default_radius(N)));
}
BENCHMARK(BM_KernelTable)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_CollisionTime(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(expected_collision_time(state.range(0)));
}
BENCHMARK(BM_CollisionTime)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_ReplicaTotal(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(replica_total(state.range(0), 0.5));
}
BENCHMARK(BM_ReplicaTotal)->Arg(1 << 10)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

static void BM_PairExact(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(laplace_pair_exact(state.range(0), 0.5));
}
BENCHMARK(BM_PairExact)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

// walk-steps per second is the figure of merit for the Monte Carlo
static void BM_SimulateCollisions(benchmark::State& state) {
  const std::int64_t N = state.range(0), reps = 64;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_collisions(N, 3, reps, 7));
  state.SetItemsProcessed(state.iterations() * reps * 3 * N);
}
BENCHMARK(BM_SimulateCollisions)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_PartitionFunction(benchmark::State& state) {
  const auto N = state.range(0);
  const Environment env(N, N, 11);
  for (auto _ : state) benchmark::DoNotOptimize(partition_function(N, polymer_scaled_beta(0.5, N), env));
}
BENCHMARK(BM_PartitionFunction)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
