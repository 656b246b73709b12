#include "rsft/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rsft::kernels {

namespace {

inline double phase_angle(const Momentum& p, double w, const SpacetimePoint& y) {
    return w * y[0] - (p[0] * y[1] + p[1] * y[2] + p[2] * y[3]);
}

// Pairs site i with its mirror N-1-i. The angle at -p is computed from the
// same products with flipped signs, so spacelike sin terms cancel exactly.
cplx paired_phase_sum(std::span<const Momentum> momenta, std::span<const double> omega,
                      std::span<const double> weight, const SpacetimePoint& y) {
    const std::size_t n = momenta.size();
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double ti = phase_angle(momenta[i], omega[i], y);
        const double tj = phase_angle(momenta[j], omega[j], y);
        const double wi = weight.empty() ? 1.0 : weight[i];
        const double wj = weight.empty() ? 1.0 : weight[j];
        acc += cplx(wi * std::cos(ti) + wj * std::cos(tj), wi * std::sin(ti) + wj * std::sin(tj));
    }
    if (n % 2 == 1) {
        const std::size_t c = n / 2;
        const double t = phase_angle(momenta[c], omega[c], y);
        const double w = weight.empty() ? 1.0 : weight[c];
        acc += cplx(w * std::cos(t), w * std::sin(t));
    }
    return acc;
}

constexpr std::size_t kChunks = 64;

} // namespace

namespace serial {

double sum(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

void kick(std::span<double> pi, std::span<const double> phi, double coeff, double shift) {
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] -= coeff * (phi[i] + shift);
}

void drift(std::span<double> phi, std::span<const double> pi, double coeff) {
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += coeff * pi[i];
}

void weighted_time_phases(std::span<const double> phi, std::span<const double> omega,
                          std::span<const double> times, std::span<cplx> out) {
    const std::size_t n = phi.size();
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t p = 0; p < n; ++p) {
            const double t = omega[p] * times[k];
            out[k * n + p] = cplx(phi[p] * std::cos(t), phi[p] * std::sin(t));
        }
}

void weighted_rows(std::span<const double> phi, std::span<const cplx> table,
                   std::span<cplx> out) {
    const std::size_t n = phi.size();
    for (std::size_t idx = 0; idx < table.size(); ++idx) out[idx] = phi[idx % n] * table[idx];
}

void contract_grid(std::span<const cplx> weighted, std::span<const cplx> spatial,
                   std::span<const GridIndex> index, std::size_t n, std::span<cplx> out) {
    for (std::size_t g = 0; g < index.size(); ++g) {
        const cplx* u = weighted.data() + index[g].time * n;
        const cplx* x = spatial.data() + index[g].space * n;
        double re = 0.0, im = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            re += u[p].real() * x[p].real() - u[p].imag() * x[p].imag();
            im += u[p].real() * x[p].imag() + u[p].imag() * x[p].real();
        }
        out[g] = cplx(re, im);
    }
}

void phase_sums(std::span<const Momentum> momenta, std::span<const double> omega,
                std::span<const double> weight, std::span<const SpacetimePoint> points,
                std::span<cplx> out) {
    for (std::size_t g = 0; g < points.size(); ++g)
        out[g] = paired_phase_sum(momenta, omega, weight, points[g]);
}

} // namespace serial

namespace omp {

double sum(std::span<const double> x) {
    std::array<double, kChunks> partial{};
    const std::size_t n = x.size();
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < kChunks; ++c) {
        const std::size_t lo = n * c / kChunks, hi = n * (c + 1) / kChunks;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i];
        partial[c] = s;
    }
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
    std::array<double, kChunks> partial{};
    const std::size_t n = x.size();
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < kChunks; ++c) {
        const std::size_t lo = n * c / kChunks, hi = n * (c + 1) / kChunks;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
        partial[c] = s;
    }
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

void kick(std::span<double> pi, std::span<const double> phi, double coeff, double shift) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pi.size());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::ptrdiff_t i = 0; i < n; ++i) pi[i] -= coeff * (phi[i] + shift);
}

void drift(std::span<double> phi, std::span<const double> pi, double coeff) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(phi.size());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (std::ptrdiff_t i = 0; i < n; ++i) phi[i] += coeff * pi[i];
}

void weighted_time_phases(std::span<const double> phi, std::span<const double> omega,
                          std::span<const double> times, std::span<cplx> out) {
    const std::size_t n = phi.size();
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(times.size() * n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        const std::size_t k = static_cast<std::size_t>(idx) / n;
        const std::size_t p = static_cast<std::size_t>(idx) % n;
        const double t = omega[p] * times[k];
        out[idx] = cplx(phi[p] * std::cos(t), phi[p] * std::sin(t));
    }
}

void weighted_rows(std::span<const double> phi, std::span<const cplx> table,
                   std::span<cplx> out) {
    const std::size_t n = phi.size();
    const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(table.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx)
        out[idx] = phi[static_cast<std::size_t>(idx) % n] * table[idx];
}

void contract_grid(std::span<const cplx> weighted, std::span<const cplx> spatial,
                   std::span<const GridIndex> index, std::size_t n, std::span<cplx> out) {
    const std::ptrdiff_t g_count = static_cast<std::ptrdiff_t>(index.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t g = 0; g < g_count; ++g) {
        const cplx* u = weighted.data() + index[g].time * n;
        const cplx* x = spatial.data() + index[g].space * n;
        double re = 0.0, im = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            re += u[p].real() * x[p].real() - u[p].imag() * x[p].imag();
            im += u[p].real() * x[p].imag() + u[p].imag() * x[p].real();
        }
        out[g] = cplx(re, im);
    }
}

void phase_sums(std::span<const Momentum> momenta, std::span<const double> omega,
                std::span<const double> weight, std::span<const SpacetimePoint> points,
                std::span<cplx> out) {
    const std::ptrdiff_t g_count = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t g = 0; g < g_count; ++g)
        out[g] = paired_phase_sum(momenta, omega, weight, points[g]);
}

} // namespace omp

int thread_count() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace rsft::kernels
