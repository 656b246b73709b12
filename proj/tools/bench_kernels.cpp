// Serial reference kernels against their OpenMP counterparts.

#include <complex>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "rsft/kernels.hpp"
#include "rsft/lattice.hpp"

namespace {

namespace k = rsft::kernels;
using k::cplx;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    std::vector<double> x(n);
    for (auto& v : x) v = normal(gen);
    return x;
}

template <auto Dot>
void bm_dot(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = noise(n, 1), y = noise(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Dot(x, y));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kick>
void bm_kick(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto phi = noise(n, 1);
    auto pi = noise(n, 2);
    for (auto _ : state) {
        Kick(pi, phi, 1e-9, 0.1);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

// One correlator sample on the 21 x 21 plane: time phases then contraction.
template <auto Phases, auto Contract>
void bm_correlator(benchmark::State& state) {
    const rsft::MomentumLattice lat(static_cast<int>(state.range(0)), 0.1);
    const std::size_t n = lat.size();
    const auto phi = noise(n, 3);
    std::vector<double> omega(n), times(21), xs(21);
    for (std::size_t p = 0; p < n; ++p) omega[p] = rsft::omega(lat.momentum(p), 1.0);
    for (int i = 0; i < 21; ++i) times[i] = xs[i] = -3.0 + 0.3 * i;
    std::vector<cplx> spatial(21 * n);
    for (std::size_t s = 0; s < 21; ++s)
        for (std::size_t p = 0; p < n; ++p) spatial[s * n + p] = std::polar(1.0, -lat.momentum(p)[0] * xs[s]);
    std::vector<k::GridIndex> index;
    for (std::size_t t = 0; t < 21; ++t)
        for (std::size_t s = 0; s < 21; ++s) index.push_back({t, s});
    std::vector<cplx> weighted(21 * n), out(index.size());
    for (auto _ : state) {
        Phases(phi, omega, times, weighted);
        Contract(weighted, spatial, index, n, out);
        benchmark::DoNotOptimize(out.data());
    }
}

BENCHMARK(bm_dot<k::serial::dot>)->Name("dot/serial")->Arg(343)->Arg(15625);
BENCHMARK(bm_dot<k::omp::dot>)->Name("dot/omp")->Arg(343)->Arg(15625);
BENCHMARK(bm_kick<k::serial::kick>)->Name("kick/serial")->Arg(343)->Arg(15625);
BENCHMARK(bm_kick<k::omp::kick>)->Name("kick/omp")->Arg(343)->Arg(15625);
BENCHMARK(bm_correlator<k::serial::weighted_time_phases, k::serial::contract_grid>)
    ->Name("correlator/serial")->Arg(9)->Arg(25);
BENCHMARK(bm_correlator<k::omp::weighted_time_phases, k::omp::contract_grid>)
    ->Name("correlator/omp")->Arg(9)->Arg(25);

} // namespace

BENCHMARK_MAIN();
