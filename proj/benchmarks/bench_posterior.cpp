#include <benchmark/benchmark.h>

#include "noonsim/analysis.hpp"
#include "noonsim/montecarlo.hpp"
#include "noonsim/posterior.hpp"
#include "noonsim/schedule.hpp"

using namespace noonsim;

static void BM_PosteriorUpdate(benchmark::State& state) {
    const PhaseGrid grid = PhaseGrid::prior_window(1.0, static_cast<std::size_t>(state.range(0)));
    const FringeModel model = FringeModel::ideal(16);
    LogPosterior posterior(grid);
    for (auto _ : state) {
        posterior.update(model, Outcome::yes);
        benchmark::DoNotOptimize(posterior.log_weights().data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PosteriorUpdate)->Arg(4096)->Arg(1 << 16)->Arg(1 << 20);

static void BM_NormalizeAndInterval(benchmark::State& state) {
    const PhaseGrid grid = PhaseGrid::prior_window(1.0, static_cast<std::size_t>(state.range(0)));
    LogPosterior posterior(grid);
    for (int k = 0; k < 8; ++k) {
        posterior.update(FringeModel::ideal(1 << k), Outcome::yes);
    }
    for (auto _ : state) {
        const auto density = posterior.normalized();
        const double estimate = map_estimate(density, grid);
        const auto ci = confidence_interval(density, grid, estimate);
        benchmark::DoNotOptimize(ci.half_width);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NormalizeAndInterval)->Arg(1 << 16)->Arg(1 << 20);

static void BM_RunTrial(benchmark::State& state) {
    TrialConfig config{Schedule::geometric(static_cast<std::int64_t>(state.range(0)), 2, 1),
                       ModelSource::ideal(), 0.3, 1.0, 0};
    std::uint64_t trial = 0;
    for (auto _ : state) {
        const auto result = run_trial(config, SeedSpec{42, trial++});
        benchmark::DoNotOptimize(result.estimate);
    }
}
BENCHMARK(BM_RunTrial)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_AllYesWidth(benchmark::State& state) {
    const Schedule schedule = Schedule::geometric(static_cast<std::int64_t>(state.range(0)), 2, 1);
    for (auto _ : state) {
        const auto point = all_yes_width(schedule);
        benchmark::DoNotOptimize(point.half_width);
    }
}
BENCHMARK(BM_AllYesWidth)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
