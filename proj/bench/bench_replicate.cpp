#include <benchmark/benchmark.h>

#include "mixvote/experiments.hpp"

using namespace mixvote;

namespace {

void replicate(benchmark::State& state, sim::Exec exec)
{
    sim::VoterModel tmpl;
    for (const auto& [label, p] : sim::calibrated_strategy_accuracies())
        tmpl.accuracy_by_strategy.emplace_back(label, p);
    tmpl.mechanism = sim::CommonShock{0.2};
    const auto models = sim::contest_models(tmpl, 50);
    ContestConfig cfg;
    cfg.label = "bench";
    cfg.mixer = sim::table_mixers()[1];
    const int reps = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(sim::replicate_scores(models, cfg, reps, exec));
    state.SetItemsProcessed(state.iterations() * reps);
}

void correlation(benchmark::State& state, sim::Exec exec)
{
    sim::VoterModel m;
    m.accuracy_by_strategy = {{sim::strategy::original, 0.69}};
    m.mechanism = sim::CommonShock{0.3};
    const int runs = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(sim::correlation_experiment(m, 8, runs, 1, exec));
    state.SetItemsProcessed(state.iterations() * runs);
}

} // namespace

BENCHMARK_CAPTURE(replicate, serial, sim::Exec::serial)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(replicate, openmp, sim::Exec::parallel)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(correlation, serial, sim::Exec::serial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(correlation, openmp, sim::Exec::parallel)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
