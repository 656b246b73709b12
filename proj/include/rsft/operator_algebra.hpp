#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsft/estimators.hpp"
#include "rsft/lattice.hpp"
#include "rsft/oracles.hpp"

namespace rsft {

/// phi(J) = sum_p phi(p) J(p).
struct LinearObservable {
    std::vector<cplx> coefficients;
    std::string label;

    cplx evaluate(std::span<const double> phi) const;
    /// Throws UsageError when every coefficient is zero.
    void validate() const;
};

using ComplexObservable = std::function<cplx(std::span<const double>)>;

/// G[i][j] = <conj(O_i) O_j>.
struct GramMatrix {
    Eigen::MatrixXcd value;
    Eigen::MatrixXd stderr_value; // zero in oracle mode, NaN when unavailable

    Eigen::Index size() const noexcept { return value.rows(); }
    /// Largest finite entry of stderr_value (0 if none).
    double max_stderr() const;
};

/// conj(J_i)^T C J_j from an exact covariance; means vanish for these ensembles.
GramMatrix gram(std::span<const LinearObservable> observables, const ExactCovariance& covariance);

/// Monte Carlo Gram matrix of arbitrary functionals of the field.
class GramAccumulator {
public:
    GramAccumulator(std::vector<ComplexObservable> observables, std::size_t batch_length);
    GramAccumulator(std::span<const LinearObservable> observables, std::size_t batch_length);

    void push(std::span<const double> phi);
    void merge(const GramAccumulator& other);
    std::uint64_t count() const noexcept { return series_.count(); }

    /// Hermitised by averaging with the conjugate transpose.
    GramMatrix result() const;

    std::size_t batch_count() const noexcept { return series_.batch_count(); }
    /// Hermitised Gram matrix of completed batch `b`.
    Eigen::MatrixXcd batch_value(std::size_t b) const;

private:
    std::vector<ComplexObservable> observables_;
    BatchSeries<cplx> series_; // k*k products, row-major
    std::vector<cplx> values_;
    std::vector<cplx> products_;
};

GramMatrix gram(std::span<const LinearObservable> observables,
                std::span<const std::vector<double>> samples, std::size_t batch_length);

// ---------------------------------------------------------------------------

/// Orthonormal basis of the quotient by the null space of a Gram matrix.
/// Column a of `transform` holds the raw-observable coefficients of basis
/// vector e_a, so transform^H G transform = I.
struct OneParticleBasis {
    Eigen::MatrixXcd transform; // k x d
    std::size_t d = 0;
    Eigen::VectorXd eigenvalues; // all k, ascending
};

inline constexpr double kOracleNullTolerance = 1e-10;

/// Drops eigen-directions with eigenvalue <= tol * max eigenvalue.
/// Throws EmptySpaceError if nothing survives.
OneParticleBasis quotient_orthonormalize(const GramMatrix& g, double tol);

/// 5 * max stderr / max eigenvalue: statistical noise cannot add dimensions.
double monte_carlo_null_tolerance(const GramMatrix& g);

/// Raw observables, their Gram matrix and the orthonormal basis. Observables
/// handed to the Fock layer are combinations sum_i c_i O_i of the raw ones.
class OneParticleSpace {
public:
    OneParticleSpace(std::vector<LinearObservable> observables, GramMatrix gram, double tol);

    static OneParticleSpace from_oracle(std::vector<LinearObservable> observables,
                                        const ExactCovariance& covariance,
                                        double tol = kOracleNullTolerance);

    std::size_t raw_count() const noexcept { return observables_.size(); }
    std::size_t dimension() const noexcept { return basis_.d; }
    const GramMatrix& gram() const noexcept { return gram_; }
    const OneParticleBasis& basis() const noexcept { return basis_; }
    const std::vector<LinearObservable>& observables() const noexcept { return observables_; }

    /// <sum c1_i O_i, sum c2_j O_j> = c1^H G c2.
    cplx inner(const Eigen::VectorXcd& c1, const Eigen::VectorXcd& c2) const;

    /// Coordinates of sum_i c_i O_i in the orthonormal basis: transform^H G c.
    /// Throws EmptySpaceError when a nonzero combination lies in the
    /// discarded null space.
    Eigen::VectorXcd coordinates(const Eigen::VectorXcd& combination) const;

    /// Unit vector selecting raw observable i.
    Eigen::VectorXcd raw(std::size_t i) const;

private:
    std::vector<LinearObservable> observables_;
    GramMatrix gram_;
    OneParticleBasis basis_;
    double tol_;
};

// ---------------------------------------------------------------------------

using Occupation = std::vector<int>;

/// Bosonic Fock space over d modes truncated to total occupation <= n_max.
/// Basis order: by total occupation, then lexicographically descending, so
/// index 0 is the vacuum and index 1 + i is the one-particle state e_i.
class FockRep {
public:
    FockRep(std::size_t d, int n_max);

    std::size_t modes() const noexcept { return d_; }
    int n_max() const noexcept { return n_max_; }
    std::size_t dimension() const noexcept { return basis_.size(); }
    const std::vector<Occupation>& basis() const noexcept { return basis_; }
    const Occupation& occupation(std::size_t index) const { return basis_.at(index); }
    int total(std::size_t index) const { return totals_.at(index); }

    /// nullopt when the occupation is outside the truncated space.
    std::optional<std::size_t> index_of(const Occupation& occ) const;

    static constexpr std::size_t vacuum() noexcept { return 0; }

    /// Basis indices with total occupation <= n_max - 1.
    std::vector<std::size_t> interior() const;

private:
    std::size_t d_;
    int n_max_;
    std::vector<Occupation> basis_;
    std::vector<int> totals_;
    std::map<Occupation, std::size_t> index_;
};

/// Binomial(d + n_max, d).
std::size_t fock_dimension(std::size_t d, int n_max);

Eigen::MatrixXcd creation_matrix(const Eigen::VectorXcd& v, const FockRep& rep);
Eigen::MatrixXcd annihilation_matrix(const Eigen::VectorXcd& v, const FockRep& rep);

/// a*(v) + a(v) for the observable sum_i c_i O_i.
Eigen::MatrixXcd field_operator(const Eigen::VectorXcd& combination,
                                const OneParticleSpace& space, const FockRep& rep);

/// Max |entry| of m restricted to rows and columns in `indices`.
double max_abs_on(const Eigen::MatrixXcd& m, std::span<const std::size_t> indices);

/// max |[phi(O1), phi(O2)] - 2i Im<O1, O2> I| on the interior subspace.
double commutator_check(const Eigen::VectorXcd& c1, const Eigen::VectorXcd& c2,
                        const OneParticleSpace& space, const FockRep& rep);

struct CheckResult {
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;

    bool passed() const noexcept { return deviation <= tolerance; }
};

inline constexpr double kAlgebraTolerance = 1e-12;

/// Gram, CCR, adjointness, number operator, vacuum, hermiticity and
/// field-commutator checks. Random vectors come from `seed`.
std::vector<CheckResult> run_fock_checks(const OneParticleSpace& space, const FockRep& rep,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Gaussian wave packet in momentum space centred on `carrier` with width
/// `width`, translated to the spacetime point `center`:
/// J(p) = exp(-|p - carrier|^2 / (2 width^2)) exp(i(omega_p c0 - p.c)).
struct Packet {
    SpacetimePoint center{0.0, 0.0, 0.0, 0.0};
    double width = 0.3;
    Momentum carrier{0.0, 0.0, 0.0};

    /// exp(-|p - carrier|^2 / (2 width^2)) per site.
    std::vector<double> envelope(const MomentumLattice& lattice) const;
};

LinearObservable packet_observable(const Packet& packet, const MomentumLattice& lattice,
                                   double mass);

struct PacketPair {
    Packet a;
    Packet b;
};

struct MicrocausalityResult {
    double k_spacelike = 0.0; // 2 Im <phi(J_A), phi(J_B)>
    double k_timelike = 0.0;
    double ratio = 0.0;
    std::optional<double> ratio_stderr; // Monte Carlo source only
};

/// Exact covariance as the correlator source.
MicrocausalityResult microcausality_ratio(const PacketPair& spacelike, const PacketPair& timelike,
                                          const MomentumLattice& lattice, double mass,
                                          const ExactCovariance& covariance);

/// Sampled fields as the correlator source. The error bar is the batch-means
/// spread of per-batch ratios.
MicrocausalityResult microcausality_ratio(const PacketPair& spacelike, const PacketPair& timelike,
                                          const MomentumLattice& lattice, double mass,
                                          std::span<const std::vector<double>> samples,
                                          std::size_t batch_length);

/// Streaming form: accumulator over packet_observables(spacelike, timelike).
MicrocausalityResult microcausality_ratio(const GramAccumulator& accumulator);

/// phi(J) for spacelike.a, spacelike.b, timelike.a, timelike.b in that order.
std::vector<LinearObservable> packet_observables(const PacketPair& spacelike,
                                                 const PacketPair& timelike,
                                                 const MomentumLattice& lattice, double mass);

/// The same ratio from the discrete Pauli-Jordan sums (free theory).
MicrocausalityResult microcausality_oracle(const PacketPair& spacelike, const PacketPair& timelike,
                                           const MomentumLattice& lattice, double mass,
                                           double beta);

} // namespace rsft
