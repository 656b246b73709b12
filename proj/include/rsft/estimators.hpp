#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsft/dynamics.hpp"
#include "rsft/kernels.hpp"
#include "rsft/lattice.hpp"

namespace rsft {

using cplx = std::complex<double>;

/// Batch-means error bars need at least this many completed batches.
inline constexpr std::size_t kMinBatches = 8;

/// max(100, samples / 64).
std::size_t default_batch_length(std::uint64_t samples) noexcept;

/// Standard error of the mean of `batch_means`, or nullopt with fewer than
/// kMinBatches entries.
std::optional<double> batch_stderr(std::span<const double> batch_means);

/// Running mean of a fixed-length vector of samples with contiguous batches
/// of `batch_length` samples. A trailing partial batch counts towards the
/// mean but not towards the error bar.
template <class T>
class BatchSeries {
public:
    BatchSeries(std::size_t dim, std::size_t batch_length);

    void push(std::span<const T> x);

    /// Associative combination over disjoint sample ranges: counts add and
    /// completed batch lists concatenate (this series first).
    void merge(const BatchSeries& other);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t batch_length() const noexcept { return batch_length_; }
    std::uint64_t count() const noexcept { return count_; }
    std::size_t batch_count() const noexcept { return batches_.size() / dim_; }

    std::vector<T> mean() const;
    /// Mean of component `i` in completed batch `b`.
    T batch_mean(std::size_t b, std::size_t i) const { return batches_[b * dim_ + i]; }

private:
    std::size_t dim_;
    std::size_t batch_length_;
    std::uint64_t count_ = 0;
    std::size_t in_batch_ = 0;
    std::vector<T> total_;
    std::vector<T> current_;
    std::vector<T> batches_; // row-major, batch_count x dim
};

extern template class BatchSeries<double>;
extern template class BatchSeries<cplx>;

struct Estimate {
    double mean = 0.0;
    std::optional<double> stderr_value; // nullopt: too few batches

    bool has_stderr() const noexcept { return stderr_value.has_value(); }
};

struct ComplexEstimate {
    cplx mean{};
    std::optional<std::array<double, 2>> stderr_value; // (real, imag)
};

/// Scalar trajectory average with batch-means error.
class RunningMoments {
public:
    explicit RunningMoments(std::size_t batch_length) : series_(1, batch_length) {}

    void push(double x) { series_.push(std::span<const double>(&x, 1)); }
    void merge(const RunningMoments& other) { series_.merge(other.series_); }

    std::uint64_t count() const noexcept { return series_.count(); }
    std::size_t batch_count() const noexcept { return series_.batch_count(); }
    Estimate estimate() const;

private:
    BatchSeries<double> series_;
};

using FieldObservable = std::function<double(std::span<const double>)>;

/// Trajectory average of `observable` over stored field samples.
RunningMoments average(const FieldObservable& observable,
                       std::span<const std::vector<double>> samples, std::size_t batch_length);

// ---------------------------------------------------------------------------

/// Covariance of phi over a subset of sites (|K| <= 64).
struct CovarianceMatrix {
    std::vector<std::size_t> sites;
    Eigen::MatrixXd value;  // symmetric
    Eigen::MatrixXd stderr_value; // NaN where unavailable
};

class ModeCovarianceAccumulator {
public:
    static constexpr std::size_t kMaxSites = 64;

    ModeCovarianceAccumulator(std::vector<std::size_t> sites, std::size_t batch_length);

    void push(std::span<const double> phi);
    void merge(const ModeCovarianceAccumulator& other);
    std::uint64_t count() const noexcept { return series_.count(); }

    CovarianceMatrix result() const;

private:
    std::vector<std::size_t> sites_;
    BatchSeries<double> series_; // K means, then K(K+1)/2 upper-triangle products
    std::vector<double> scratch_;
};

/// Per-site variance over every site, with batch-means errors.
struct ModeVariances {
    std::vector<double> value;
    std::vector<double> stderr_value; // NaN when unavailable
};

class ModeVarianceAccumulator {
public:
    ModeVarianceAccumulator(std::size_t n, std::size_t batch_length);

    void push(std::span<const double> phi);
    std::uint64_t count() const noexcept { return series_.count(); }
    ModeVariances result() const;

private:
    std::size_t n_;
    BatchSeries<double> series_; // n means, then n second moments
    std::vector<double> scratch_;
};

/// K sites spread evenly over [0, n): floor((k + 1/2) n / K).
std::vector<std::size_t> spread_sites(std::size_t n, std::size_t count);

CovarianceMatrix mode_covariance(std::span<const std::size_t> sites,
                                 std::span<const std::vector<double>> samples,
                                 std::size_t batch_length);

// ---------------------------------------------------------------------------

/// Second mixed derivative of ln <exp(j_p phi_p + j_q phi_q)> at j = 0 by
/// the four-point central difference with j = +-eps. For p == q this is the
/// second difference with step 2 eps.
class MgfProbe {
public:
    MgfProbe(std::size_t p, std::size_t q, double epsilon, std::size_t batch_length);

    void push(std::span<const double> phi);
    std::uint64_t count() const noexcept { return series_.count(); }
    Estimate estimate() const;

    std::size_t p() const noexcept { return p_; }
    std::size_t q() const noexcept { return q_; }
    double epsilon() const noexcept { return eps_; }

private:
    double from_means(double zpp, double zpm, double zmp, double zmm) const;

    std::size_t p_, q_;
    double eps_;
    BatchSeries<double> series_;
};

// ---------------------------------------------------------------------------

/// Points on the (y0, y1) plane with y2 = y3 = 0; y0 is the outer loop.
struct PlaneGrid {
    double t_extent = 3.0;
    std::size_t t_points = 21;
    double x_extent = 3.0;
    std::size_t x_points = 21;

    std::vector<SpacetimePoint> points() const;
};

struct CorrelatorGrid {
    std::vector<SpacetimePoint> points;
    std::vector<cplx> values;
    std::vector<std::array<double, 2>> stderrs; // NaN when unavailable
    std::string source;                        // "mc" or "oracle"
};

/// Accumulates A(lambda) * B(y, lambda) with A = sum_p phi(p) and
/// B = sum_p phi(p) exp(i(omega_p y0 - p.y)), omega_p taken from the mass
/// shell at the current field. Equals the double sum over (p', p).
class CorrelatorAccumulator {
public:
    CorrelatorAccumulator(const MomentumLattice& lattice, const MassShell& shell,
                          std::vector<SpacetimePoint> points, std::size_t batch_length);

    void push(std::span<const double> phi);
    std::uint64_t count() const noexcept { return series_.count(); }
    CorrelatorGrid result() const;

    /// B(y) for one field, for tests.
    std::vector<cplx> phase_projection(std::span<const double> phi);

private:
    std::size_t n_;
    MassShell shell_;
    std::vector<SpacetimePoint> points_;
    std::vector<double> times_;
    std::vector<kernels::GridIndex> index_;
    std::vector<double> p_squared_;
    std::vector<cplx> spatial_;    // rows e^{-i p.y}
    std::vector<cplx> time_table_; // rows e^{i omega y0}, Fixed shell only
    std::vector<double> omega_;
    std::vector<cplx> weighted_;
    std::vector<cplx> projection_;
    std::vector<cplx> product_;
    BatchSeries<cplx> series_;
};

CorrelatorGrid correlator(const MomentumLattice& lattice, const MassShell& shell,
                          std::vector<SpacetimePoint> points,
                          std::span<const std::vector<double>> samples, std::size_t batch_length);

/// Per-point agreement score: the larger of |re diff| / re stderr and
/// |im diff| / im stderr. A component with zero difference scores 0; one
/// with a nonzero difference and no error bar scores infinity.
std::vector<double> grid_scores(const CorrelatorGrid& estimate, const CorrelatorGrid& reference);

/// Fraction of scores <= threshold.
double fraction_within(std::span<const double> scores, double threshold);

// ---------------------------------------------------------------------------

struct SamplingPlan {
    std::uint64_t equilibration_steps = 0;
    std::uint64_t sampling_steps = 0;
    std::uint64_t thin_stride = 10;

    std::uint64_t total_steps() const noexcept { return equilibration_steps + sampling_steps; }
    std::uint64_t sample_count() const noexcept { return sampling_steps / thin_stride; }
    void validate() const;
};

using FieldSink = std::function<void(std::span<const double>)>;

/// Runs the state from its current step_count to plan.total_steps(). After
/// equilibration, every thin_stride-th step's field is handed to each sink.
/// Resuming from a checkpointed state continues the same schedule.
void sample_trajectory(ExtendedState& state, const IntegratorParams& params,
                       const SamplingPlan& plan, std::span<const FieldSink> sinks,
                       std::span<const Observer> step_observers = {});

} // namespace rsft
