#include "rsft/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rsft/error.hpp"

namespace rsft {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return a * b - b * a;
}

Eigen::VectorXcd random_vector(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(normal(gen), normal(gen));
    return v;
}

} // namespace

cplx LinearObservable::evaluate(std::span<const double> phi) const {
    if (phi.size() != coefficients.size()) throw UsageError("observable length mismatch");
    cplx acc{};
    for (std::size_t p = 0; p < phi.size(); ++p) acc += phi[p] * coefficients[p];
    return acc;
}

void LinearObservable::validate() const {
    if (std::all_of(coefficients.begin(), coefficients.end(),
                    [](const cplx& c) { return c == cplx{}; }))
        throw UsageError("observable '" + label + "' has no nonzero coefficient");
}

double GramMatrix::max_stderr() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < stderr_value.size(); ++i)
        if (std::isfinite(stderr_value.data()[i])) m = std::max(m, stderr_value.data()[i]);
    return m;
}

GramMatrix gram(std::span<const LinearObservable> observables, const ExactCovariance& covariance) {
    if (observables.empty()) throw UsageError("gram needs at least one observable");
    const auto k = static_cast<Eigen::Index>(observables.size());
    GramMatrix g{Eigen::MatrixXcd(k, k), Eigen::MatrixXd::Zero(k, k)};
    for (Eigen::Index i = 0; i < k; ++i) {
        if (observables[i].coefficients.size() != covariance.n)
            throw UsageError("observable length does not match the covariance");
        for (Eigen::Index j = 0; j < k; ++j)
            g.value(i, j) = covariance.bilinear(observables[i].coefficients,
                                                observables[j].coefficients);
    }
    g.value = 0.5 * (g.value + g.value.adjoint()).eval();
    return g;
}

GramAccumulator::GramAccumulator(std::vector<ComplexObservable> observables,
                                 std::size_t batch_length)
    : observables_(std::move(observables)),
      series_(observables_.empty() ? 1 : observables_.size() * observables_.size(),
              batch_length) {
    if (observables_.empty()) throw UsageError("gram needs at least one observable");
    values_.resize(observables_.size());
    products_.resize(series_.dim());
}

namespace {

std::vector<ComplexObservable> wrap(std::span<const LinearObservable> observables) {
    std::vector<ComplexObservable> out;
    for (const auto& o : observables) {
        o.validate();
        out.emplace_back([o](std::span<const double> phi) { return o.evaluate(phi); });
    }
    return out;
}

} // namespace

GramAccumulator::GramAccumulator(std::span<const LinearObservable> observables,
                                 std::size_t batch_length)
    : GramAccumulator(wrap(observables), batch_length) {}

void GramAccumulator::push(std::span<const double> phi) {
    const std::size_t k = observables_.size();
    for (std::size_t i = 0; i < k; ++i) values_[i] = observables_[i](phi);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) products_[i * k + j] = std::conj(values_[i]) * values_[j];
    series_.push(products_);
}

void GramAccumulator::merge(const GramAccumulator& other) { series_.merge(other.series_); }

GramMatrix GramAccumulator::result() const {
    if (series_.count() == 0) throw EstimatorError("no samples");
    const std::size_t k = observables_.size();
    const auto ki = static_cast<Eigen::Index>(k);
    const auto mean = series_.mean();
    GramMatrix g{Eigen::MatrixXcd(ki, ki), Eigen::MatrixXd(ki, ki)};
    const std::size_t nb = series_.batch_count();
    std::vector<double> re(nb), im(nb);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            g.value(i, j) = 0.5 * (mean[i * k + j] + std::conj(mean[j * k + i]));
            for (std::size_t b = 0; b < nb; ++b) {
                const cplx h = 0.5 * (series_.batch_mean(b, i * k + j) +
                                      std::conj(series_.batch_mean(b, j * k + i)));
                re[b] = h.real();
                im[b] = h.imag();
            }
            const auto sr = batch_stderr(re), si = batch_stderr(im);
            g.stderr_value(i, j) = sr && si ? std::hypot(*sr, *si) : kNaN;
        }
    return g;
}

Eigen::MatrixXcd GramAccumulator::batch_value(std::size_t b) const {
    if (b >= series_.batch_count()) throw UsageError("batch index out of range");
    const std::size_t k = observables_.size();
    const auto ki = static_cast<Eigen::Index>(k);
    Eigen::MatrixXcd g(ki, ki);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            g(i, j) = 0.5 * (series_.batch_mean(b, i * k + j) +
                             std::conj(series_.batch_mean(b, j * k + i)));
    return g;
}

GramMatrix gram(std::span<const LinearObservable> observables,
                std::span<const std::vector<double>> samples, std::size_t batch_length) {
    GramAccumulator acc(observables, batch_length);
    for (const auto& phi : samples) acc.push(phi);
    return acc.result();
}

// ---------------------------------------------------------------------------

OneParticleBasis quotient_orthonormalize(const GramMatrix& g, double tol) {
    if (g.value.rows() == 0 || g.value.rows() != g.value.cols())
        throw UsageError("Gram matrix must be square and nonempty");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g.value);
    if (eig.info() != Eigen::Success) throw DomainError("Gram eigendecomposition failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double top = lambda.maxCoeff();
    if (!(top > 0.0)) throw EmptySpaceError("Gram matrix has no positive eigenvalue");

    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = lambda.size() - 1; i >= 0; --i)
        if (lambda(i) > tol * top) kept.push_back(i);
    if (kept.empty()) throw EmptySpaceError("every direction is below the null tolerance");

    OneParticleBasis out;
    out.d = kept.size();
    out.eigenvalues = lambda;
    out.transform.resize(g.value.rows(), static_cast<Eigen::Index>(out.d));
    for (std::size_t a = 0; a < kept.size(); ++a)
        out.transform.col(static_cast<Eigen::Index>(a)) =
            eig.eigenvectors().col(kept[a]) / std::sqrt(lambda(kept[a]));
    return out;
}

double monte_carlo_null_tolerance(const GramMatrix& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g.value, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw EmptySpaceError("Gram matrix has no positive eigenvalue");
    return 5.0 * g.max_stderr() / top;
}

OneParticleSpace::OneParticleSpace(std::vector<LinearObservable> observables, GramMatrix gram,
                                   double tol)
    : observables_(std::move(observables)), gram_(std::move(gram)),
      basis_(quotient_orthonormalize(gram_, tol)), tol_(tol) {
    if (static_cast<Eigen::Index>(observables_.size()) != gram_.size())
        throw UsageError("observable count does not match the Gram matrix");
}

OneParticleSpace OneParticleSpace::from_oracle(std::vector<LinearObservable> observables,
                                               const ExactCovariance& covariance, double tol) {
    auto g = rsft::gram(observables, covariance);
    return OneParticleSpace(std::move(observables), std::move(g), tol);
}

cplx OneParticleSpace::inner(const Eigen::VectorXcd& c1, const Eigen::VectorXcd& c2) const {
    return (c1.adjoint() * gram_.value * c2)(0, 0);
}

Eigen::VectorXcd OneParticleSpace::coordinates(const Eigen::VectorXcd& combination) const {
    if (combination.size() != gram_.size())
        throw UsageError("combination length does not match the observable count");
    const Eigen::VectorXcd coords = basis_.transform.adjoint() * gram_.value * combination;
    const double c2 = combination.squaredNorm();
    if (c2 == 0.0) return coords;
    const double top = basis_.eigenvalues.maxCoeff();
    if (coords.squaredNorm() <= tol_ * top * c2)
        throw EmptySpaceError("observable lies in the discarded null space");
    return coords;
}

Eigen::VectorXcd OneParticleSpace::raw(std::size_t i) const {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(gram_.size());
    e(static_cast<Eigen::Index>(i)) = 1.0;
    return e;
}

// ---------------------------------------------------------------------------

namespace {

// All compositions of `total` into d parts, lexicographically descending.
void compositions(std::size_t d, int total, Occupation& prefix, std::vector<Occupation>& out) {
    if (prefix.size() + 1 == d) {
        prefix.push_back(total);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int first = total; first >= 0; --first) {
        prefix.push_back(first);
        compositions(d, total - first, prefix, out);
        prefix.pop_back();
    }
}

} // namespace

std::size_t fock_dimension(std::size_t d, int n_max) {
    // C(d + n, d) computed incrementally; exact for the sizes used here.
    std::size_t c = 1;
    for (std::size_t i = 1; i <= d; ++i) c = c * (static_cast<std::size_t>(n_max) + i) / i;
    return c;
}

FockRep::FockRep(std::size_t d, int n_max) : d_(d), n_max_(n_max) {
    if (d == 0) throw UsageError("Fock space needs at least one mode");
    if (n_max < 0) throw UsageError("n_max must be nonnegative");
    for (int n = 0; n <= n_max; ++n) {
        Occupation prefix;
        compositions(d, n, prefix, basis_);
    }
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        index_.emplace(basis_[i], i);
        int t = 0;
        for (int v : basis_[i]) t += v;
        totals_.push_back(t);
    }
}

std::optional<std::size_t> FockRep::index_of(const Occupation& occ) const {
    const auto it = index_.find(occ);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> FockRep::interior() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < basis_.size(); ++i)
        if (totals_[i] <= n_max_ - 1) out.push_back(i);
    return out;
}

Eigen::MatrixXcd creation_matrix(const Eigen::VectorXcd& v, const FockRep& rep) {
    if (static_cast<std::size_t>(v.size()) != rep.modes())
        throw UsageError("one-particle vector has the wrong dimension");
    const auto dim = static_cast<Eigen::Index>(rep.dimension());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t col = 0; col < rep.dimension(); ++col) {
        if (rep.total(col) >= rep.n_max()) continue;
        Occupation occ = rep.occupation(col);
        for (std::size_t i = 0; i < rep.modes(); ++i) {
            const cplx vi = v(static_cast<Eigen::Index>(i));
            if (vi == cplx{}) continue;
            const double amp = std::sqrt(static_cast<double>(occ[i] + 1));
            ++occ[i];
            const std::size_t row = *rep.index_of(occ);
            --occ[i];
            m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += vi * amp;
        }
    }
    return m;
}

Eigen::MatrixXcd annihilation_matrix(const Eigen::VectorXcd& v, const FockRep& rep) {
    return creation_matrix(v, rep).adjoint();
}

Eigen::MatrixXcd field_operator(const Eigen::VectorXcd& combination,
                                const OneParticleSpace& space, const FockRep& rep) {
    if (space.dimension() != rep.modes())
        throw UsageError("Fock space and one-particle space dimensions differ");
    const Eigen::VectorXcd v = space.coordinates(combination);
    const Eigen::MatrixXcd up = creation_matrix(v, rep);
    return up + up.adjoint();
}

double max_abs_on(const Eigen::MatrixXcd& m, std::span<const std::size_t> indices) {
    double worst = 0.0;
    for (std::size_t r : indices)
        for (std::size_t c : indices)
            worst = std::max(worst, std::abs(m(static_cast<Eigen::Index>(r),
                                               static_cast<Eigen::Index>(c))));
    return worst;
}

double commutator_check(const Eigen::VectorXcd& c1, const Eigen::VectorXcd& c2,
                        const OneParticleSpace& space, const FockRep& rep) {
    if (rep.n_max() < 1) throw UsageError("commutator check needs n_max >= 1");
    const auto f1 = field_operator(c1, space, rep);
    const auto f2 = field_operator(c2, space, rep);
    const double im = space.inner(c1, c2).imag();
    const auto dim = static_cast<Eigen::Index>(rep.dimension());
    const Eigen::MatrixXcd dev =
        commutator(f1, f2) - cplx(0.0, 2.0 * im) * Eigen::MatrixXcd::Identity(dim, dim);
    return max_abs_on(dev, rep.interior());
}

std::vector<CheckResult> run_fock_checks(const OneParticleSpace& space, const FockRep& rep,
                                         std::uint64_t seed) {
    if (rep.n_max() < 1) throw UsageError("Fock checks need n_max >= 1");
    std::mt19937_64 gen(seed);
    const std::size_t d = rep.modes();
    const auto dim = static_cast<Eigen::Index>(rep.dimension());
    const auto interior = rep.interior();
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(dim, dim);
    const auto& g = space.gram();
    std::vector<CheckResult> out;

    out.push_back({"gram_hermitian", (g.value - g.value.adjoint()).cwiseAbs().maxCoeff(), 0.0});
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g.value, Eigen::EigenvaluesOnly);
        const double top = eig.eigenvalues().maxCoeff();
        const double floor = std::max(5.0 * g.max_stderr(), kAlgebraTolerance * top);
        out.push_back({"gram_psd", std::max(0.0, -eig.eigenvalues().minCoeff()), floor});
    }
    {
        const auto& t = space.basis().transform;
        const Eigen::MatrixXcd gram_in_basis = t.adjoint() * g.value * t;
        const auto dd = static_cast<Eigen::Index>(space.dimension());
        out.push_back({"basis_orthonormal",
                       (gram_in_basis - Eigen::MatrixXcd::Identity(dd, dd)).cwiseAbs().maxCoeff(),
                       1e-10});
    }

    std::vector<Eigen::VectorXcd> units;
    for (std::size_t i = 0; i < d; ++i) units.push_back(Eigen::VectorXcd::Unit(d, i));
    std::vector<Eigen::VectorXcd> vecs = units;
    for (int r = 0; r < 3; ++r) vecs.push_back(random_vector(d, gen));

    double aa = 0.0, cc = 0.0, ac = 0.0, vac = 0.0;
    for (const auto& u : vecs) {
        const auto au = annihilation_matrix(u, rep);
        const auto cu = creation_matrix(u, rep);
        vac = std::max(vac, (au.col(FockRep::vacuum())).cwiseAbs().maxCoeff());
        for (const auto& w : vecs) {
            const auto aw = annihilation_matrix(w, rep);
            const auto cw = creation_matrix(w, rep);
            aa = std::max(aa, commutator(au, aw).cwiseAbs().maxCoeff());
            cc = std::max(cc, commutator(cu, cw).cwiseAbs().maxCoeff());
            const cplx uw = u.dot(w); // conj(u)^T w
            ac = std::max(ac, max_abs_on(commutator(au, cw) - uw * identity, interior));
        }
    }
    out.push_back({"ccr_a_a", aa, kAlgebraTolerance});
    out.push_back({"ccr_astar_astar", cc, kAlgebraTolerance});
    out.push_back({"ccr_a_astar", ac, kAlgebraTolerance});
    out.push_back({"vacuum_annihilated", vac, 0.0});

    double adj = 0.0;
    for (int r = 0; r < 8; ++r) {
        const auto v = random_vector(d, gen);
        const auto f = random_vector(rep.dimension(), gen);
        const auto h = random_vector(rep.dimension(), gen);
        const cplx lhs = (creation_matrix(v, rep) * f).dot(h);
        const cplx rhs = f.dot(annihilation_matrix(v, rep) * h);
        adj = std::max(adj, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
    out.push_back({"adjointness", adj, kAlgebraTolerance});

    {
        Eigen::MatrixXcd number = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& e : units) number += creation_matrix(e, rep) * annihilation_matrix(e, rep);
        Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i) expected(i, i) = rep.total(static_cast<std::size_t>(i));
        out.push_back({"number_operator", (number - expected).cwiseAbs().maxCoeff(),
                       kAlgebraTolerance});
    }

    // Field operators for the raw observables and random combinations of them.
    std::vector<Eigen::VectorXcd> combos;
    for (std::size_t i = 0; i < space.raw_count(); ++i) combos.push_back(space.raw(i));
    for (int r = 0; r < 2; ++r) combos.push_back(random_vector(space.raw_count(), gen));
    double herm = 0.0, comm = 0.0;
    for (const auto& c1 : combos) {
        const auto f = field_operator(c1, space, rep);
        herm = std::max(herm, (f - f.adjoint()).cwiseAbs().maxCoeff());
        for (const auto& c2 : combos) comm = std::max(comm, commutator_check(c1, c2, space, rep));
    }
    out.push_back({"field_hermitian", herm, kAlgebraTolerance});
    out.push_back({"field_commutator", comm, kAlgebraTolerance});

    {
        // <Omega| phi(O)^2 |Omega> = <O, O> for the first raw observable.
        const auto c = space.raw(0);
        const auto f = field_operator(c, space, rep);
        const cplx vev = (f * f)(FockRep::vacuum(), FockRep::vacuum());
        const double norm = space.inner(c, c).real();
        out.push_back({"vacuum_two_point", std::abs(vev - norm) / norm, kAlgebraTolerance});
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> Packet::envelope(const MomentumLattice& lattice) const {
    if (!(width > 0.0)) throw UsageError("packet width must be positive");
    std::vector<double> g(lattice.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = lattice.momentum(i);
        double r2 = 0.0;
        for (int c = 0; c < 3; ++c) r2 += (p[c] - carrier[c]) * (p[c] - carrier[c]);
        g[i] = std::exp(-r2 / (2.0 * width * width));
    }
    return g;
}

LinearObservable packet_observable(const Packet& packet, const MomentumLattice& lattice,
                                   double mass) {
    const auto g = packet.envelope(lattice);
    LinearObservable o;
    o.coefficients.resize(lattice.size());
    const auto& c = packet.center;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = lattice.momentum(i);
        const double theta = omega(p, mass) * c[0] - (p[0] * c[1] + p[1] * c[2] + p[2] * c[3]);
        o.coefficients[i] = g[i] * cplx(std::cos(theta), std::sin(theta));
    }
    return o;
}

std::vector<LinearObservable> packet_observables(const PacketPair& spacelike,
                                                 const PacketPair& timelike,
                                                 const MomentumLattice& lattice, double mass) {
    std::vector<LinearObservable> obs{packet_observable(spacelike.a, lattice, mass),
                                      packet_observable(spacelike.b, lattice, mass),
                                      packet_observable(timelike.a, lattice, mass),
                                      packet_observable(timelike.b, lattice, mass)};
    obs[0].label = "spacelike_a";
    obs[1].label = "spacelike_b";
    obs[2].label = "timelike_a";
    obs[3].label = "timelike_b";
    return obs;
}

namespace {

MicrocausalityResult ratio_from(double k_space, double k_time, double scale) {
    if (!(std::abs(k_time) > 1e-12 * scale))
        throw DomainError("timelike reference commutator is below the numerical floor");
    return {k_space, k_time, std::abs(k_space) / std::abs(k_time), std::nullopt};
}

MicrocausalityResult ratio_from_gram(const Eigen::MatrixXcd& g) {
    const double scale = std::sqrt(std::abs(g(2, 2) * g(3, 3)));
    return ratio_from(2.0 * g(0, 1).imag(), 2.0 * g(2, 3).imag(), scale);
}

} // namespace

MicrocausalityResult microcausality_ratio(const PacketPair& spacelike, const PacketPair& timelike,
                                          const MomentumLattice& lattice, double mass,
                                          const ExactCovariance& covariance) {
    const auto obs = packet_observables(spacelike, timelike, lattice, mass);
    return ratio_from_gram(gram(obs, covariance).value);
}

MicrocausalityResult microcausality_ratio(const PacketPair& spacelike, const PacketPair& timelike,
                                          const MomentumLattice& lattice, double mass,
                                          std::span<const std::vector<double>> samples,
                                          std::size_t batch_length) {
    GramAccumulator acc(packet_observables(spacelike, timelike, lattice, mass), batch_length);
    for (const auto& phi : samples) acc.push(phi);
    return microcausality_ratio(acc);
}

MicrocausalityResult microcausality_ratio(const GramAccumulator& accumulator) {
    auto result = ratio_from_gram(accumulator.result().value);
    std::vector<double> per_batch(accumulator.batch_count());
    for (std::size_t b = 0; b < per_batch.size(); ++b) {
        const auto g = accumulator.batch_value(b);
        per_batch[b] = std::abs(g(0, 1).imag()) / std::abs(g(2, 3).imag());
    }
    result.ratio_stderr = batch_stderr(per_batch);
    return result;
}

MicrocausalityResult microcausality_oracle(const PacketPair& spacelike, const PacketPair& timelike,
                                           const MomentumLattice& lattice, double mass,
                                           double beta) {
    auto k_of = [&](const PacketPair& pair) {
        const auto ga = pair.a.envelope(lattice);
        const auto gb = pair.b.envelope(lattice);
        std::vector<double> w(ga.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = ga[i] * gb[i];
        SpacetimePoint sep{};
        for (int c = 0; c < 4; ++c) sep[c] = pair.b.center[c] - pair.a.center[c];
        double scale = 0.0;
        for (double x : w) scale += x;
        return std::pair{2.0 * pauli_jordan_weighted(lattice, mass, beta, w, sep), scale / beta};
    };
    const double ks = k_of(spacelike).first;
    const auto [kt, st] = k_of(timelike);
    return ratio_from(ks, kt, st);
}

} // namespace rsft
