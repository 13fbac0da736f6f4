#include <random>

#include <benchmark/benchmark.h>

#include "sirkit/kernels.hpp"
#include "sirkit/network.hpp"
#include "sirkit/report.hpp"
#include "sirkit/verify.hpp"

using namespace sirkit;
using kernels::Execution;

namespace
{
struct Fixture
{
    explicit Fixture(std::size_t n) : weights(n, n), x(n), y(n), v(n, 1.0 / static_cast<double>(n)), out(3 * n)
    {
        std::mt19937_64 rng(n);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < n; ++j)
                weights(i, j) = u(rng);
            x[i] = u(rng);
            y[i] = u(rng) * (1.0 - x[i]);
        }
    }

    kernels::Matrix weights;
    std::vector<double> x, y, v, out;
};

template<Execution E>
void network_rhs(benchmark::State& state)
{
    Fixture f(static_cast<std::size_t>(state.range(0)));
    std::size_t const n = f.x.size();
    std::span<double> out(f.out);
    for (auto _ : state)
    {
        kernels::network_rhs(f.weights, 1.0, 0.5, f.x, f.y, out.subspan(0, n), out.subspan(n, n),
                             out.subspan(2 * n, n), E);
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

template<Execution E>
void scaled_matvec(benchmark::State& state)
{
    Fixture f(static_cast<std::size_t>(state.range(0)));
    std::size_t const n = f.x.size();
    for (auto _ : state)
    {
        kernels::scaled_matvec(f.x, f.weights, f.v, std::span<double>(f.out).subspan(0, n), E);
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

template<Execution E>
void threshold_sweep(benchmark::State& state)
{
    auto const base = verify::threshold_template();
    auto const grid = verify::threshold_consistency_grid();
    for (auto _ : state)
        benchmark::DoNotOptimize(report::run_sweep(base, grid, E));
}
}  // namespace

BENCHMARK(network_rhs<Execution::serial>)->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(network_rhs<Execution::parallel>)->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(scaled_matvec<Execution::serial>)->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(scaled_matvec<Execution::parallel>)->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(threshold_sweep<Execution::serial>)->Unit(benchmark::kMillisecond);
BENCHMARK(threshold_sweep<Execution::parallel>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
