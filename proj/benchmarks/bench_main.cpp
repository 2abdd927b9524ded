#include "botlab/decomposition.hpp"
#include "botlab/inference.hpp"
#include "botlab/probes.hpp"

#include <benchmark/benchmark.h>

using namespace botlab;

static void BM_CensusVarRatio(benchmark::State& state) {
    const RootedTree t = build_dary(2, static_cast<int>(state.range(0)));
    const TransitionChain c = bsc(0.3);
    const EsPolynomial f = census_polynomial(t, c);
    for (auto _ : state) benchmark::DoNotOptimize(var_ratio(t, c, f));
}
BENCHMARK(BM_CensusVarRatio)->DenseRange(4, 10, 2);

static void BM_BpPosterior(benchmark::State& state) {
    const RootedTree t = build_dary(2, static_cast<int>(state.range(0)));
    const TransitionChain c = bsc(0.2);
    const Labeling full = sample_labeling(t, c, RootInit{}, 1);
    Labeling obs(t.n());
    for (int v : t.leaves()) obs.state[v] = full.state[v];
    for (auto _ : state) benchmark::DoNotOptimize(bp_posterior(t, c, obs));
}
BENCHMARK(BM_BpPosterior)->DenseRange(4, 14, 5);

static void BM_Decompose(benchmark::State& state) {
    const RootedTree t = build_dary(2, 4);
    const TransitionChain c = bsc(0.3);
    const Decomposer dec(t, c, t.root(), 0, 2);
    EsPolynomial f;
    f.q = 2;
    f.terms.push_back({{15, 20}, {1.0, -0.5, 0.25, 2.0}});
    f.terms.push_back({{18, 29}, {0.3, 0.1, -1.0, 0.7}});
    for (auto _ : state) benchmark::DoNotOptimize(dec.decompose(f, state.range(0) != 0));
}
BENCHMARK(BM_Decompose)->Arg(0)->Arg(1);
BENCHMARK_MAIN();
