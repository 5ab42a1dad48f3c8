#include <benchmark/benchmark.h>

#include "gclab/features.hpp"
#include "gclab/generators.hpp"
#include "gclab/layers.hpp"
#include "gclab/model.hpp"
#include "gclab/netstats.hpp"

using namespace gclab;

namespace {

Graph ws_graph(std::size_t n) { return gen_ws(n, 4, 0.1, 7); }

void BM_GenerateWS(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(gen_ws(n, 4, 0.1, 7));
}
BENCHMARK(BM_GenerateWS)->Arg(256)->Arg(1024);

void BM_GenerateBA(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(gen_ba(n, 4, 7));
}
BENCHMARK(BM_GenerateBA)->Arg(256)->Arg(1024);

void BM_Transitivity(benchmark::State& state) {
    const Graph g = ws_graph(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(transitivity(g));
}
BENCHMARK(BM_Transitivity)->Arg(256)->Arg(1024);

void BM_AvgPathLength(benchmark::State& state) {
    const Graph g = ws_graph(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(avg_path_length(g));
}
BENCHMARK(BM_AvgPathLength)->Arg(256)->Arg(1024);

void BM_IdentityFeatures(benchmark::State& state) {
    const Graph g = ws_graph(512);
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(identity_features(g, k));
}
BENCHMARK(BM_IdentityFeatures)->Arg(2)->Arg(4)->Arg(8);

void BM_ForwardBackward(benchmark::State& state) {
    const Graph g = ws_graph(256);
    const GraphBatch batch = GraphBatch::single(g);
    const FeatureMatrix f = identity_features(g, 4);
    const ad::Tensor x = ad::Tensor::constant(ad::Matrix(f.num_nodes, f.dim, f.values));
    ModelConfig cfg;
    cfg.arch = static_cast<Architecture>(state.range(0));
    cfg.feature = FeatureKind::identity(4);
    cfg.hidden = 16;
    Model model(cfg);
    Rng rng(1);
    for (auto _ : state) {
        ad::Tape t;
        t.backward(ad::sum_all(t, model.forward(t, batch, x, true, rng)));
    }
    state.SetLabel(architecture_name(cfg.arch));
}
BENCHMARK(BM_ForwardBackward)->DenseRange(0, 3);

}  // namespace
BENCHMARK_MAIN();
