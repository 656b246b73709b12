#include "rsft/oracles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rsft/error.hpp"
#include "rsft/kernels.hpp"

namespace rsft {

namespace {

std::vector<double> fixed_omegas(const std::vector<Momentum>& momenta, double mass) {
    std::vector<double> out(momenta.size());
    for (std::size_t i = 0; i < momenta.size(); ++i) out[i] = omega(momenta[i], mass);
    return out;
}

double sin_phase(const Momentum& p, double w, const SpacetimePoint& y) {
    return std::sin(w * y[0] - (p[0] * y[1] + p[1] * y[2] + p[2] * y[3]));
}

} // namespace

Eigen::MatrixXd ExactCovariance::dense() const {
    if (n > 4096) throw UsageError("dense covariance limited to N <= 4096");
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(m, m, off_diagonal);
    c.diagonal().setConstant(diagonal);
    return c;
}

void ExactCovariance::apply(std::span<const std::complex<double>> x,
                            std::span<std::complex<double>> out) const {
    std::complex<double> total{};
    for (const auto& v : x) total += v;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (diagonal - off_diagonal) * x[i] + off_diagonal * total;
}

std::complex<double> ExactCovariance::bilinear(std::span<const std::complex<double>> x,
                                               std::span<const std::complex<double>> y) const {
    std::complex<double> diag{}, sx{}, sy{};
    for (std::size_t i = 0; i < x.size(); ++i) {
        diag += std::conj(x[i]) * y[i];
        sx += x[i];
        sy += y[i];
    }
    return (diagonal - off_diagonal) * diag + off_diagonal * std::conj(sx) * sy;
}

ExactCovariance exact_covariance(MatterKind kind, std::size_t n, double beta) {
    if (n == 0) throw UsageError("covariance needs N >= 1");
    if (!(beta > 0.0)) throw UsageError("beta must be positive");
    ExactCovariance c{kind, n, beta, 1.0 / beta, 0.0};
    if (kind == MatterKind::FreeCollective) {
        const double inv = 1.0 / (beta * static_cast<double>(n + 1));
        c.diagonal = 1.0 / beta - inv;
        c.off_diagonal = -inv;
    }
    return c;
}

std::vector<std::complex<double>> expected_correlator(MatterKind kind,
                                                      const MomentumLattice& lattice,
                                                      const MassShell& shell, double beta,
                                                      std::span<const SpacetimePoint> points) {
    if (!shell.is_fixed())
        throw NotAvailable(std::string("no closed-form correlator for the ") +
                           to_string(shell.kind) + " mass shell");
    if (!(beta > 0.0)) throw UsageError("beta must be positive");
    // Closed form of the row sum, not diagonal + (N-1) * off, which rounds.
    const double row = kind == MatterKind::Free
                           ? 1.0 / beta
                           : 1.0 / (beta * static_cast<double>(lattice.size() + 1));
    const auto momenta = lattice.momenta();
    const auto w = fixed_omegas(momenta, shell.mass);
    std::vector<std::complex<double>> out(points.size());
    kernels::omp::phase_sums(momenta, w, {}, points, out);
    for (auto& v : out) v *= row;
    return out;
}

CorrelatorGrid expected_correlator_grid(MatterKind kind, const MomentumLattice& lattice,
                                        const MassShell& shell, double beta,
                                        std::vector<SpacetimePoint> points) {
    auto values = expected_correlator(kind, lattice, shell, beta, points);
    std::vector<std::array<double, 2>> zero(points.size(), {0.0, 0.0});
    return {std::move(points), std::move(values), std::move(zero), "oracle"};
}

std::vector<double> pauli_jordan_discrete(const MomentumLattice& lattice, double mass, double beta,
                                          std::span<const SpacetimePoint> points) {
    std::vector<double> out(points.size());
    const std::vector<double> unit(lattice.size(), 1.0);
    for (std::size_t g = 0; g < points.size(); ++g)
        out[g] = pauli_jordan_weighted(lattice, mass, beta, unit, points[g]);
    return out;
}

double pauli_jordan_weighted(const MomentumLattice& lattice, double mass, double beta,
                             std::span<const double> weight, const SpacetimePoint& y) {
    const std::size_t n = lattice.size();
    if (weight.size() != n) throw UsageError("weight has the wrong length");
    double acc = 0.0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = lattice.mirror(i);
        const auto pi = lattice.momentum(i), pj = lattice.momentum(j);
        acc += weight[i] * sin_phase(pi, omega(pi, mass), y) +
               weight[j] * sin_phase(pj, omega(pj, mass), y);
    }
    if (n % 2 == 1) {
        const auto pc = lattice.momentum(n / 2);
        acc += weight[n / 2] * sin_phase(pc, omega(pc, mass), y);
    }
    return acc * (1.0 / beta);
}

std::complex<double> continuum_wightman(const SpacetimePoint& y, double mass, double cutoff,
                                        std::size_t quadrature_points) {
    if (!(cutoff > 0.0)) throw UsageError("cutoff must be positive");
    if (quadrature_points < 16) throw UsageError("need at least 16 quadrature points");
    const double r = std::sqrt(y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
    const double upper = 6.0 * cutoff;

    auto integrand = [&](double p) {
        const double w = std::sqrt(p * p + mass * mass);
        const double sinc = r * p < 1e-8 ? 1.0 - (r * p) * (r * p) / 6.0 : std::sin(r * p) / (r * p);
        const double radial = p * p / (2.0 * w) * sinc * std::exp(-(p / cutoff) * (p / cutoff));
        return radial * std::complex<double>(std::cos(w * y[0]), std::sin(w * y[0]));
    };
    auto simpson = [&](std::size_t intervals) {
        intervals += intervals % 2;
        const double h = upper / static_cast<double>(intervals);
        std::complex<double> acc = integrand(0.0) + integrand(upper);
        for (std::size_t i = 1; i < intervals; ++i)
            acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(h * static_cast<double>(i));
        return acc * (h / 3.0);
    };

    const double prefactor = 4.0 * std::numbers::pi / std::pow(2.0 * std::numbers::pi, 3);
    const auto coarse = prefactor * simpson(quadrature_points);
    const auto fine = prefactor * simpson(2 * quadrature_points);
    const double diff = std::abs(fine - coarse);
    if (diff > 1e-8 * (1.0 + std::abs(fine)))
        throw DomainError("continuum quadrature did not converge: |I(" +
                          std::to_string(2 * quadrature_points) + ") - I(" +
                          std::to_string(quadrature_points) + ")| = " + std::to_string(diff) +
                          "; raise quadrature_points");
    return fine;
}

} // namespace rsft
