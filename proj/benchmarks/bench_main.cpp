#include <benchmark/benchmark.h>

#include "ranklab/correlation.hpp"
#include "ranklab/divergence.hpp"
#include "ranklab/poisson.hpp"
#include "ranklab/sidon.hpp"

namespace {

using namespace ranklab;

ConstructionSpec deep_sidon() {
    return make_cnu_spec(SidonClassParams::power_rule(Rat(1), Int(3)));
}

void BM_FloorSetUnion(benchmark::State& state) {
    std::vector<Interval> a_iv, b_iv;
    for (long i = 0; i < state.range(0); ++i) {
        a_iv.push_back(Interval{Int(3 * i), Int(3 * i + 2)});
        b_iv.push_back(Interval{Int(3 * i + 1), Int(3 * i + 3)});
    }
    FloorSet a(1, a_iv), b(1, b_iv);
    for (auto _ : state) {
        FloorSet u = a.unite(b);
        benchmark::DoNotOptimize(u);
    }
}
BENCHMARK(BM_FloorSetUnion)->Range(16, 4096);

void BM_StageBuild(benchmark::State& state) {
    for (auto _ : state) {
        Construction c(deep_sidon());
        c.ensure_stage(static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(c.built_stages());
    }
}
BENCHMARK(BM_StageBuild)->DenseRange(3, 5);

void BM_ExactCorrelation(benchmark::State& state) {
    Construction c(deep_sidon());
    CorrelationEngine engine(c);
    FloorSet x1 = c.x1(1);
    Int lag = c.offsets(3)[1]; // a stage-3 column offset
    for (auto _ : state) {
        CorrelationValue v = engine.correlation(lag, x1, x1, Rat(0));
        benchmark::DoNotOptimize(v.lo);
    }
}
BENCHMARK(BM_ExactCorrelation);

void BM_PowerSum(benchmark::State& state) {
    Construction c(deep_sidon());
    CorrelationEngine engine(c);
    for (auto _ : state) {
        Rat sum = engine.power_sum(2, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(sum);
    }
}
BENCHMARK(BM_PowerSum)->DenseRange(2, 4);

void BM_CylinderMeasure(benchmark::State& state) {
    Construction c(deep_sidon());
    FloorSet x1 = c.x1(2);
    CylinderConjunction conj;
    conj.events.push_back(CylinderEvent{x1, Int(0)});
    conj.events.push_back(CylinderEvent{x1.translated(Int(1)), Int(1)});
    conj.events.push_back(CylinderEvent{FloorSet::single(2, Int(0)), Int(0)});
    for (auto _ : state) {
        ExactExp v = cylinder_measure(c, conj);
        benchmark::DoNotOptimize(v.coeff);
    }
}
BENCHMARK(BM_CylinderMeasure);

void BM_DivergenceTerm(benchmark::State& state) {
    DivergenceOptions options;
    options.active_stages = 4;
    DivergenceScenario scenario = DivergenceScenario::staircase(options);
    Int n = scenario.windows()[2].first + 5;
    for (auto _ : state) {
        auto terms = scenario.average_series(Int(8));
        benchmark::DoNotOptimize(terms.size());
    }
    benchmark::DoNotOptimize(n);
}
BENCHMARK(BM_DivergenceTerm);

} // namespace

BENCHMARK_MAIN();
