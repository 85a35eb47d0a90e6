#include <benchmark/benchmark.h>

#include <vector>

#include "pinning/disorder.hpp"
#include "pinning/fractional_moment.hpp"
#include "pinning/gradient_model.hpp"
#include "pinning/laplacian_model.hpp"

using namespace pinning;

// state.range(0) = threads; 1 is the serial reference path

static void BM_QuenchedGradientMC(benchmark::State& state)
{
    gradient::GradientParams p{3, 0.5, 12.0, 2000, gradient::Endpoint::Pinned};
    for (auto _ : state)
        benchmark::DoNotOptimize(gradient::quenched_free_energy_mc(
            p, 64, 7, gradient::FreeEnergyNormalization::Ratio, Execution{static_cast<int>(state.range(0))}));
}
BENCHMARK(BM_QuenchedGradientMC)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_LaplacianSubsets(benchmark::State& state)
{
    const auto om = disorder::sample(disorder::DisorderLaw::StandardNormal, 19, 3, 0);
    std::vector<double> b(om.values.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = std::exp(0.3 * om.values[i]);
    for (auto _ : state)
        benchmark::DoNotOptimize(laplacian::log_subset_coefficients(b, Execution{static_cast<int>(state.range(0))}));
}
BENCHMARK(BM_LaplacianSubsets)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_FractionalMomentExact(benchmark::State& state)
{
    const double eps = gradient::epsilon_c0(5);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            fm::fractional_moment_table_exact(16, 0.1, 5, eps, 0.9, Execution{static_cast<int>(state.range(0))}));
}
BENCHMARK(BM_FractionalMomentExact)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_ImportanceTable(benchmark::State& state)
{
    const auto bundle = gradient::tilted_bundle(0.1, 5);
    fm::ImportanceOptions opt{128, 8, 1};
    for (auto _ : state)
        benchmark::DoNotOptimize(fm::fractional_moment_table_is(
            1024, 16, 1e-3, 0.9, bundle, opt, Execution{static_cast<int>(state.range(0))}));
}
BENCHMARK(BM_ImportanceTable)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
