#include <benchmark/benchmark.h>

#include <vector>

#include "consensus/opinion_space.hpp"

using namespace consensus;

namespace {

void BM_MetricProfileLattice(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const std::vector<int> extents{L, L};
  const Graph g = lattice(extents);
  for (auto _ : state) benchmark::DoNotOptimize(metric_profile(g).diameter());
  state.SetComplexityN(g.num_vertices());
}
BENCHMARK(BM_MetricProfileLattice)->Arg(5)->Arg(10)->Arg(20)->Complexity();

void BM_EccentricityCheckTree(benchmark::State& state) {
  const auto space = OpinionSpace::build(regular_tree(3, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(check_eccentricity_inequalities(space).holds);
}
BENCHMARK(BM_EccentricityCheckTree)->Arg(2)->Arg(3)->Arg(4);

}  // namespace
