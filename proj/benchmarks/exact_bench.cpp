#include <benchmark/benchmark.h>

#include "consensus/analysis.hpp"

using namespace consensus;

namespace {

// Dense below the transient-state cutoff, Gauss-Seidel above it.
void BM_ExactConsensus(benchmark::State& state) {
  const int individuals = static_cast<int>(state.range(0));
  const ModelInstance m(path_graph(individuals), OpinionSpace::build(path_graph(4)), 2, ProcessKind::Attraction);
  for (auto _ : state) benchmark::DoNotOptimize(exact_consensus(m, InitialDistribution::uniform()));
}
BENCHMARK(BM_ExactConsensus)->Arg(4)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace
