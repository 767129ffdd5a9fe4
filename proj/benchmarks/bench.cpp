#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tetra/density.hpp"
#include "tetra/embeddings.hpp"
#include "tetra/enumerate.hpp"
#include "tetra/lattice.hpp"
#include "tetra/sphere.hpp"

using namespace tetra;

namespace {

std::vector<std::array<Vec3, 4>> sample_configs(std::size_t n) {
  std::mt19937_64 rng(4242);
  std::vector<std::array<Vec3, 4>> out;
  while (out.size() < n) {
    std::array<Vec3, 4> cfg;
    for (auto& v : cfg)
      v = Vec3{static_cast<std::int64_t>(rng() % 9), static_cast<std::int64_t>(rng() % 9),
               static_cast<std::int64_t>(rng() % 9)};
    bool distinct = true;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (cfg[static_cast<std::size_t>(i)] == cfg[static_cast<std::size_t>(j)]) distinct = false;
    if (distinct) out.push_back(cfg);
  }
  return out;
}

void BM_CanonicalKey(benchmark::State& state) {
  auto configs = sample_configs(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(canonical_key(configs[i]));
    i = (i + 1) % configs.size();
  }
}
BENCHMARK(BM_CanonicalKey);

void BM_SphereTableBuild(benchmark::State& state) {
  const std::int64_t limit = state.range(0);
  for (auto _ : state) {
    SphereTable t = SphereTable::build(limit);
    benchmark::DoNotOptimize(t.count(limit));
  }
}
BENCHMARK(BM_SphereTableBuild)->Arg(1024)->Arg(4096);

void BM_EnumerateClasses(benchmark::State& state) {
  for (auto _ : state) {
    ClassTable t = enumerate_classes(2, false, 4);
    benchmark::DoNotOptimize(t.classes.size());
  }
}
BENCHMARK(BM_EnumerateClasses);

void BM_CountTriples(benchmark::State& state) {
  SphereTable table = SphereTable::build(16);
  EmbeddingCounter counter(table);
  GramMatrix g = GramMatrix::sym3(5, 1, 2, 6, 0, 9);
  for (auto _ : state) benchmark::DoNotOptimize(counter.count3(g));
}
BENCHMARK(BM_CountTriples);

void BM_BinaryQuadratic(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(detail::count_binary_quadratic(3, 1, 7, 2, 5, 4, 3, 6));
  }
}
BENCHMARK(BM_BinaryQuadratic);

void BM_LocalDensityFast(benchmark::State& state) {
  GramMatrix id3 = GramMatrix::identity(3);
  GramMatrix lam = GramMatrix::diag2(2, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(local_density(id3, lam, 2, 9));
  }
}
BENCHMARK(BM_LocalDensityFast);

}  // namespace

BENCHMARK_MAIN();
