#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rsft/action.hpp"
#include "rsft/estimators.hpp"
#include "rsft/lattice.hpp"

namespace rsft {

/// Exact covariance of the Gaussian density exp(-beta S^m) for the two
/// closed-form matter actions. Stored as (diagonal, off-diagonal) so that
/// N = 25^3 stays O(N).
///   Free:           1/beta on the diagonal, 0 elsewhere.
///   FreeCollective: inverse of beta (I + 1 1^T), i.e. (1/beta)(I - 1 1^T/(N+1)).
struct ExactCovariance {
    MatterKind kind = MatterKind::Free;
    std::size_t n = 1;
    double beta = 1.0;
    double diagonal = 1.0;
    double off_diagonal = 0.0;

    double operator()(std::size_t i, std::size_t j) const noexcept {
        return i == j ? diagonal : off_diagonal;
    }
    /// Every row sums to this.
    double row_sum() const noexcept { return diagonal + static_cast<double>(n - 1) * off_diagonal; }

    /// Dense N x N matrix (N <= 4096).
    Eigen::MatrixXd dense() const;

    /// out = C x in O(N).
    void apply(std::span<const std::complex<double>> x, std::span<std::complex<double>> out) const;

    /// conj(x)^T C y in O(N).
    std::complex<double> bilinear(std::span<const std::complex<double>> x,
                                  std::span<const std::complex<double>> y) const;
};

ExactCovariance exact_covariance(MatterKind kind, std::size_t n, double beta);

/// sum_{p', p} C_{p'p} exp(i(omega_p y0 - p.y)) per grid point, via the row
/// sum identity. Throws NotAvailable for dynamical mass shells.
std::vector<std::complex<double>> expected_correlator(MatterKind kind,
                                                      const MomentumLattice& lattice,
                                                      const MassShell& shell, double beta,
                                                      std::span<const SpacetimePoint> points);

/// The same values wrapped as a grid with zero error bars, source "oracle".
CorrelatorGrid expected_correlator_grid(MatterKind kind, const MomentumLattice& lattice,
                                        const MassShell& shell, double beta,
                                        std::vector<SpacetimePoint> points);

/// (1/beta) sum_p sin(omega_p y0 - p.y): the imaginary part of the free
/// expected correlator, summed in +p/-p pairs so it vanishes exactly at
/// y0 = 0.
std::vector<double> pauli_jordan_discrete(const MomentumLattice& lattice, double mass, double beta,
                                          std::span<const SpacetimePoint> points);

/// (1/beta) sum_p w(p) sin(omega_p y0 - p.y) for a real site weight w.
double pauli_jordan_weighted(const MomentumLattice& lattice, double mass, double beta,
                             std::span<const double> weight, const SpacetimePoint& y);

/// (2 pi)^-3 integral d^3p / (2 omega) exp(i(omega y0 - p.y)) exp(-(|p|/cutoff)^2),
/// reduced to a radial integral and evaluated by composite Simpson with
/// `quadrature_points` and twice that many intervals. Uses the correlator
/// estimator's phase convention. Qualitative comparison only.
/// Throws DomainError when the two resolutions disagree.
std::complex<double> continuum_wightman(const SpacetimePoint& y, double mass, double cutoff,
                                        std::size_t quadrature_points);

} // namespace rsft
