#include "rsft/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rsft {

namespace k = kernels::omp;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// exp() of anything above this overflows a double.
constexpr double kMaxExponent = 700.0;

} // namespace

std::size_t default_batch_length(std::uint64_t samples) noexcept {
    return static_cast<std::size_t>(std::max<std::uint64_t>(100, samples / 64));
}

std::optional<double> batch_stderr(std::span<const double> batch_means) {
    const std::size_t b = batch_means.size();
    if (b < kMinBatches) return std::nullopt;
    double mean = 0.0;
    for (double x : batch_means) mean += x;
    mean /= static_cast<double>(b);
    double ss = 0.0;
    for (double x : batch_means) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

template <class T>
BatchSeries<T>::BatchSeries(std::size_t dim, std::size_t batch_length)
    : dim_(dim), batch_length_(batch_length), total_(dim, T{}), current_(dim, T{}) {
    if (dim == 0) throw UsageError("BatchSeries needs dim >= 1");
    if (batch_length == 0) throw UsageError("batch length must be positive");
}

template <class T>
void BatchSeries<T>::push(std::span<const T> x) {
    if (x.size() != dim_) throw UsageError("sample has the wrong dimension");
    for (std::size_t i = 0; i < dim_; ++i) {
        total_[i] += x[i];
        current_[i] += x[i];
    }
    ++count_;
    if (++in_batch_ == batch_length_) {
        const double inv = 1.0 / static_cast<double>(batch_length_);
        for (std::size_t i = 0; i < dim_; ++i) {
            batches_.push_back(current_[i] * inv);
            current_[i] = T{};
        }
        in_batch_ = 0;
    }
}

template <class T>
void BatchSeries<T>::merge(const BatchSeries& other) {
    if (other.dim_ != dim_ || other.batch_length_ != batch_length_)
        throw UsageError("cannot merge series with different shapes");
    for (std::size_t i = 0; i < dim_; ++i) total_[i] += other.total_[i];
    count_ += other.count_;
    batches_.insert(batches_.end(), other.batches_.begin(), other.batches_.end());
}

template <class T>
std::vector<T> BatchSeries<T>::mean() const {
    std::vector<T> out(dim_, T{});
    if (count_ == 0) return out;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = total_[i] * inv;
    return out;
}

template class BatchSeries<double>;
template class BatchSeries<cplx>;

Estimate RunningMoments::estimate() const {
    if (series_.count() == 0) throw EstimatorError("no samples");
    std::vector<double> bm(series_.batch_count());
    for (std::size_t b = 0; b < bm.size(); ++b) bm[b] = series_.batch_mean(b, 0);
    return {series_.mean()[0], batch_stderr(bm)};
}

RunningMoments average(const FieldObservable& observable,
                       std::span<const std::vector<double>> samples, std::size_t batch_length) {
    RunningMoments acc(batch_length);
    for (const auto& phi : samples) acc.push(observable(phi));
    return acc;
}

// ---------------------------------------------------------------------------

ModeCovarianceAccumulator::ModeCovarianceAccumulator(std::vector<std::size_t> sites,
                                                     std::size_t batch_length)
    : sites_(std::move(sites)),
      series_(sites_.empty() ? 1 : sites_.size() + sites_.size() * (sites_.size() + 1) / 2,
              batch_length) {
    if (sites_.empty()) throw UsageError("covariance needs at least one site");
    if (sites_.size() > kMaxSites) throw UsageError("covariance supports at most 64 sites");
    scratch_.resize(series_.dim());
}

void ModeCovarianceAccumulator::push(std::span<const double> phi) {
    const std::size_t m = sites_.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (sites_[i] >= phi.size()) throw UsageError("covariance site out of range");
        scratch_[i] = phi[sites_[i]];
    }
    std::size_t at = m;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) scratch_[at++] = scratch_[i] * scratch_[j];
    series_.push(scratch_);
}

void ModeCovarianceAccumulator::merge(const ModeCovarianceAccumulator& other) {
    if (other.sites_ != sites_) throw UsageError("cannot merge covariances over different sites");
    series_.merge(other.series_);
}

CovarianceMatrix ModeCovarianceAccumulator::result() const {
    if (series_.count() == 0) throw EstimatorError("no samples");
    const std::size_t m = sites_.size();
    const auto mean = series_.mean();
    const std::size_t nb = series_.batch_count();
    CovarianceMatrix out{sites_, Eigen::MatrixXd(m, m), Eigen::MatrixXd(m, m)};
    std::vector<double> per_batch(nb);
    std::size_t at = m;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j, ++at) {
            const double c = mean[at] - mean[i] * mean[j];
            for (std::size_t b = 0; b < nb; ++b)
                per_batch[b] = series_.batch_mean(b, at) -
                               series_.batch_mean(b, i) * series_.batch_mean(b, j);
            const double se = batch_stderr(per_batch).value_or(kNaN);
            out.value(i, j) = out.value(j, i) = c;
            out.stderr_value(i, j) = out.stderr_value(j, i) = se;
        }
    return out;
}

ModeVarianceAccumulator::ModeVarianceAccumulator(std::size_t n, std::size_t batch_length)
    : n_(n), series_(n == 0 ? 1 : 2 * n, batch_length) {
    if (n == 0) throw UsageError("variance needs at least one site");
    scratch_.resize(2 * n);
}

void ModeVarianceAccumulator::push(std::span<const double> phi) {
    if (phi.size() != n_) throw UsageError("field length does not match the accumulator");
    for (std::size_t i = 0; i < n_; ++i) {
        scratch_[i] = phi[i];
        scratch_[n_ + i] = phi[i] * phi[i];
    }
    series_.push(scratch_);
}

ModeVariances ModeVarianceAccumulator::result() const {
    if (series_.count() == 0) throw EstimatorError("no samples");
    const auto mean = series_.mean();
    const std::size_t nb = series_.batch_count();
    ModeVariances out{std::vector<double>(n_), std::vector<double>(n_)};
    std::vector<double> per_batch(nb);
    for (std::size_t i = 0; i < n_; ++i) {
        out.value[i] = mean[n_ + i] - mean[i] * mean[i];
        for (std::size_t b = 0; b < nb; ++b) {
            const double m = series_.batch_mean(b, i);
            per_batch[b] = series_.batch_mean(b, n_ + i) - m * m;
        }
        out.stderr_value[i] = batch_stderr(per_batch).value_or(kNaN);
    }
    return out;
}

std::vector<std::size_t> spread_sites(std::size_t n, std::size_t count) {
    if (count == 0 || count > n) throw UsageError("site count must be in [1, N]");
    std::vector<std::size_t> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = ((2 * k + 1) * n) / (2 * count);
    return out;
}

CovarianceMatrix mode_covariance(std::span<const std::size_t> sites,
                                 std::span<const std::vector<double>> samples,
                                 std::size_t batch_length) {
    ModeCovarianceAccumulator acc({sites.begin(), sites.end()}, batch_length);
    for (const auto& phi : samples) acc.push(phi);
    return acc.result();
}

// ---------------------------------------------------------------------------

MgfProbe::MgfProbe(std::size_t p, std::size_t q, double epsilon, std::size_t batch_length)
    : p_(p), q_(q), eps_(epsilon), series_(4, batch_length) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw UsageError("mgf probe amplitude must be positive");
}

void MgfProbe::push(std::span<const double> phi) {
    if (p_ >= phi.size() || q_ >= phi.size()) throw UsageError("mgf site out of range");
    const double a = eps_ * phi[p_];
    const double b = eps_ * phi[q_];
    const std::array<double, 4> exponents{a + b, a - b, -a + b, -a - b};
    std::array<double, 4> z{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (exponents[i] > kMaxExponent)
            throw EstimatorError("exponential overflow in the mgf average; use a smaller epsilon");
        z[i] = std::exp(exponents[i]);
    }
    series_.push(z);
}

double MgfProbe::from_means(double zpp, double zpm, double zmp, double zmm) const {
    return (std::log(zpp) - std::log(zpm) - std::log(zmp) + std::log(zmm)) / (4.0 * eps_ * eps_);
}

Estimate MgfProbe::estimate() const {
    if (series_.count() == 0) throw EstimatorError("no samples");
    const auto m = series_.mean();
    for (double z : m)
        if (!std::isfinite(z))
            throw EstimatorError("exponential overflow in the mgf average; use a smaller epsilon");
    std::vector<double> per_batch(series_.batch_count());
    for (std::size_t b = 0; b < per_batch.size(); ++b)
        per_batch[b] = from_means(series_.batch_mean(b, 0), series_.batch_mean(b, 1),
                                  series_.batch_mean(b, 2), series_.batch_mean(b, 3));
    return {from_means(m[0], m[1], m[2], m[3]), batch_stderr(per_batch)};
}

// ---------------------------------------------------------------------------

std::vector<SpacetimePoint> PlaneGrid::points() const {
    if (t_points == 0 || x_points == 0) throw UsageError("grid needs at least one point per axis");
    auto axis = [](double extent, std::size_t n, std::size_t i) {
        return n == 1 ? 0.0 : -extent + 2.0 * extent * static_cast<double>(i) / (n - 1);
    };
    std::vector<SpacetimePoint> out;
    out.reserve(t_points * x_points);
    for (std::size_t i = 0; i < t_points; ++i)
        for (std::size_t j = 0; j < x_points; ++j)
            out.push_back({axis(t_extent, t_points, i), axis(x_extent, x_points, j), 0.0, 0.0});
    return out;
}

CorrelatorAccumulator::CorrelatorAccumulator(const MomentumLattice& lattice,
                                             const MassShell& shell,
                                             std::vector<SpacetimePoint> points,
                                             std::size_t batch_length)
    : n_(lattice.size()), shell_(shell), points_(std::move(points)),
      series_(points_.empty() ? 1 : points_.size(), batch_length) {
    if (points_.empty()) throw UsageError("correlator grid is empty");
    for (const auto& y : points_)
        for (double c : y)
            if (!std::isfinite(c)) throw UsageError("correlator grid point is not finite");

    // Deduplicate time values and spatial vectors; the phase factorises.
    std::map<double, std::size_t> time_ids;
    std::map<std::array<double, 3>, std::size_t> space_ids;
    std::vector<std::array<double, 3>> spaces;
    for (const auto& y : points_) {
        auto [t, t_new] = time_ids.try_emplace(y[0], times_.size());
        if (t_new) times_.push_back(y[0]);
        const std::array<double, 3> v{y[1], y[2], y[3]};
        auto [x, x_new] = space_ids.try_emplace(v, spaces.size());
        if (x_new) spaces.push_back(v);
        index_.push_back({t->second, x->second});
    }

    const auto momenta = lattice.momenta();
    p_squared_.resize(n_);
    for (std::size_t p = 0; p < n_; ++p)
        p_squared_[p] = momenta[p][0] * momenta[p][0] + momenta[p][1] * momenta[p][1] +
                        momenta[p][2] * momenta[p][2];

    spatial_.resize(spaces.size() * n_);
    for (std::size_t m = 0; m < spaces.size(); ++m)
        for (std::size_t p = 0; p < n_; ++p) {
            const double a = momenta[p][0] * spaces[m][0] + momenta[p][1] * spaces[m][1] +
                             momenta[p][2] * spaces[m][2];
            spatial_[m * n_ + p] = cplx(std::cos(a), -std::sin(a));
        }

    omega_.resize(n_);
    if (shell_.is_fixed()) {
        for (std::size_t p = 0; p < n_; ++p)
            omega_[p] = std::sqrt(p_squared_[p] + shell_.mass * shell_.mass);
        time_table_.resize(times_.size() * n_);
        const std::vector<double> ones(n_, 1.0);
        k::weighted_time_phases(ones, omega_, times_, time_table_);
    }
    weighted_.resize(times_.size() * n_);
    projection_.resize(points_.size());
    product_.resize(points_.size());
}

std::vector<cplx> CorrelatorAccumulator::phase_projection(std::span<const double> phi) {
    if (phi.size() != n_) throw UsageError("field has the wrong length");
    if (shell_.is_fixed()) {
        k::weighted_rows(phi, time_table_, weighted_);
    } else {
        effective_masses(shell_, phi, omega_);
        for (std::size_t p = 0; p < n_; ++p)
            omega_[p] = std::sqrt(p_squared_[p] + omega_[p] * omega_[p]);
        k::weighted_time_phases(phi, omega_, times_, weighted_);
    }
    k::contract_grid(weighted_, spatial_, index_, n_, projection_);
    return projection_;
}

void CorrelatorAccumulator::push(std::span<const double> phi) {
    phase_projection(phi);
    const double a = kernels::serial::sum(phi);
    for (std::size_t g = 0; g < projection_.size(); ++g) product_[g] = a * projection_[g];
    series_.push(product_);
}

CorrelatorGrid CorrelatorAccumulator::result() const {
    if (series_.count() == 0) throw EstimatorError("no samples");
    CorrelatorGrid out{points_, series_.mean(), {}, "mc"};
    const std::size_t nb = series_.batch_count();
    std::vector<double> re(nb), im(nb);
    out.stderrs.resize(points_.size());
    for (std::size_t g = 0; g < points_.size(); ++g) {
        for (std::size_t b = 0; b < nb; ++b) {
            re[b] = series_.batch_mean(b, g).real();
            im[b] = series_.batch_mean(b, g).imag();
        }
        out.stderrs[g] = {batch_stderr(re).value_or(kNaN), batch_stderr(im).value_or(kNaN)};
    }
    return out;
}

CorrelatorGrid correlator(const MomentumLattice& lattice, const MassShell& shell,
                          std::vector<SpacetimePoint> points,
                          std::span<const std::vector<double>> samples, std::size_t batch_length) {
    CorrelatorAccumulator acc(lattice, shell, std::move(points), batch_length);
    for (const auto& phi : samples) acc.push(phi);
    return acc.result();
}

namespace {

double component_score(double diff, double se) {
    if (diff == 0.0) return 0.0;
    if (!(se > 0.0)) return std::numeric_limits<double>::infinity();
    return std::abs(diff) / se;
}

} // namespace

std::vector<double> grid_scores(const CorrelatorGrid& estimate, const CorrelatorGrid& reference) {
    if (estimate.points != reference.points) throw UsageError("grids have different points");
    std::vector<double> out(estimate.points.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cplx d = estimate.values[i] - reference.values[i];
        out[i] = std::max(component_score(d.real(), estimate.stderrs[i][0]),
                          component_score(d.imag(), estimate.stderrs[i][1]));
    }
    return out;
}

double fraction_within(std::span<const double> scores, double threshold) {
    if (scores.empty()) throw UsageError("no scores");
    const auto n = std::count_if(scores.begin(), scores.end(),
                                 [&](double z) { return z <= threshold; });
    return static_cast<double>(n) / static_cast<double>(scores.size());
}

// ---------------------------------------------------------------------------

void SamplingPlan::validate() const {
    if (thin_stride == 0) throw UsageError("thin_stride must be positive");
}

void sample_trajectory(ExtendedState& state, const IntegratorParams& params,
                       const SamplingPlan& plan, std::span<const FieldSink> sinks,
                       std::span<const Observer> step_observers) {
    plan.validate();
    params.validate();
    const std::uint64_t end = plan.total_steps();
    while (state.step_count < end) {
        try {
            advance(state, params);
        } catch (const StepFailure& e) {
            throw e.at_step(state.step_count + 1);
        }
        for (const auto& observe : step_observers) observe(state);
        const std::uint64_t done = state.step_count;
        if (done > plan.equilibration_steps &&
            (done - plan.equilibration_steps) % plan.thin_stride == 0)
            for (const auto& sink : sinks) sink(state.phi);
    }
}

} // namespace rsft
