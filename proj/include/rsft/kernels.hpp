#pragma once

// Data-parallel inner loops. `serial` is the reference implementation the
// tests compare against; `omp` is what the library calls. Both namespaces
// expose the same signatures.
//
// Reductions in `omp` use a fixed chunk partition that does not depend on
// the thread count, so results are reproducible across OMP_NUM_THREADS
// (they may differ from `serial` by rounding only).

#include <complex>
#include <cstddef>
#include <span>

#include "rsft/lattice.hpp"

namespace rsft::kernels {

using cplx = std::complex<double>;

/// Index pair selecting one time row and one spatial row of the phase tables.
struct GridIndex {
    std::size_t time;
    std::size_t space;
};

#define RSFT_KERNEL_DECLS                                                                    \
    double sum(std::span<const double> x);                                                   \
    double dot(std::span<const double> x, std::span<const double> y);                        \
    /* pi[i] -= coeff * (phi[i] + shift) */                                                  \
    void kick(std::span<double> pi, std::span<const double> phi, double coeff, double shift); \
    /* phi[i] += coeff * pi[i] */                                                            \
    void drift(std::span<double> phi, std::span<const double> pi, double coeff);             \
    /* out[k*N + p] = phi[p] * exp(i * omega[p] * times[k]) */                              \
    void weighted_time_phases(std::span<const double> phi, std::span<const double> omega,    \
                              std::span<const double> times, std::span<cplx> out);           \
    /* out[k*N + p] = phi[p] * table[k*N + p] */                                             \
    void weighted_rows(std::span<const double> phi, std::span<const cplx> table,             \
                       std::span<cplx> out);                                                 \
    /* out[g] = sum_p weighted[t_g*N + p] * spatial[s_g*N + p] */                            \
    void contract_grid(std::span<const cplx> weighted, std::span<const cplx> spatial,        \
                       std::span<const GridIndex> index, std::size_t n, std::span<cplx> out); \
    /* out[g] = sum_p weight[p] * exp(i(omega[p] y0 - p.y)), summed in +p/-p pairs */        \
    void phase_sums(std::span<const Momentum> momenta, std::span<const double> omega,        \
                    std::span<const double> weight, std::span<const SpacetimePoint> points,  \
                    std::span<cplx> out);

namespace serial {
RSFT_KERNEL_DECLS
} // namespace serial

namespace omp {
RSFT_KERNEL_DECLS
} // namespace omp

#undef RSFT_KERNEL_DECLS

/// Number of threads the omp kernels will use (1 without OpenMP).
int thread_count() noexcept;

} // namespace rsft::kernels
