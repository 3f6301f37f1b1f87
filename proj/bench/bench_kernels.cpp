// Serial vs OpenMP kernels: the resolver grid search and experiment batches.
// Build in Release and run ./bench_kernels; set OMP_NUM_THREADS to compare.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "occlusim/agent.hpp"
#include "occlusim/resolver.hpp"
#include "occlusim/rng.hpp"

using namespace occlusim;

namespace {

// A desk boxed in by trees so the search has to walk deep into the grid:
// the only gap sits at roughly +70 degrees.
struct HardQuery {
  std::vector<Circle> trees;
  ResolutionQuery query;

  HardQuery() {
    const Vec2 origin{0.0, 0.0};
    for (int deg = -90; deg <= 90; deg += 6) {
      if (deg >= 66 && deg <= 72) continue;
      const double a = deg_to_rad(deg);
      trees.emplace_back(unit_from_angle(a) * 1.5, 0.35);
    }
    query.origin = origin;
    query.desk = OrientedRect(Vec2{1.5, 0.0}, 0.8, 0.4, kPi);
    query.obstacles = trees;
  }
};

void resolver_serial(benchmark::State& state) {
  const HardQuery h;
  for (auto _ : state) benchmark::DoNotOptimize(find_occlusion_free(h.query));
}

void resolver_parallel(benchmark::State& state) {
  const HardQuery h;
  for (auto _ : state) benchmark::DoNotOptimize(find_occlusion_free_parallel(h.query));
}

void resolver_reference(benchmark::State& state) {
  const HardQuery h;
  for (auto _ : state) benchmark::DoNotOptimize(reference::find_occlusion_free_search(h.query));
}

std::vector<BatchJob> batch_jobs() {
  SceneConfig sc;
  sc.extent_x = 120.0;
  sc.extent_y = 120.0;
  sc.tree_count = 900;
  auto scene = std::make_shared<const Scene>(generate_scene(sc));
  std::vector<BatchJob> jobs;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    BatchJob job;
    job.scene = scene;
    job.config.strategy = Strategy::rdw;
    job.config.n_trials = 3;
    job.config.seed = seed;
    jobs.push_back(job);
  }
  return jobs;
}

void batch_serial(benchmark::State& state) {
  const auto jobs = batch_jobs();
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(jobs));
}

void batch_parallel(benchmark::State& state) {
  const auto jobs = batch_jobs();
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_parallel(jobs));
}

}  // namespace

BENCHMARK(resolver_serial);
BENCHMARK(resolver_parallel);
BENCHMARK(resolver_reference);
BENCHMARK(batch_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(batch_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
