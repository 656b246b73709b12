#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "rsft/error.hpp"
#include "rsft/estimators.hpp"

#include "support.hpp"

using namespace rsft;
using rsft::test::gaussian_samples;
using rsft::test::inverse_hessian;
using rsft::test::noise;

TEST_CASE("batch length default") {
    CHECK(default_batch_length(0) == 100);
    CHECK(default_batch_length(6400) == 100);
    CHECK(default_batch_length(64000) == 1000);
    CHECK(default_batch_length(40000) == 625);
}

TEST_CASE("batch stderr needs eight batches") {
    CHECK_FALSE(batch_stderr(std::vector<double>(7, 1.0)).has_value());
    CHECK(batch_stderr(std::vector<double>(8, 1.0)) == std::optional<double>(0.0));
    // Sample variance of {0..7} is 6, so the stderr is sqrt(6/8).
    std::vector<double> m(8);
    std::iota(m.begin(), m.end(), 0.0);
    CHECK(*batch_stderr(m) == doctest::Approx(std::sqrt(6.0 / 8.0)));
}

TEST_CASE("constant observable has zero error") {
    RunningMoments acc(10);
    for (int i = 0; i < 100; ++i) acc.push(1.0);
    const auto e = acc.estimate();
    CHECK(e.mean == 1.0);
    REQUIRE(e.has_stderr());
    CHECK(*e.stderr_value == 0.0);

    RunningMoments few(10);
    for (int i = 0; i < 79; ++i) few.push(1.0);
    CHECK_FALSE(few.estimate().has_stderr());
    CHECK(few.estimate().mean == 1.0);
}

TEST_CASE("batch-means error matches the known variance of an iid stream") {
    const auto x = noise(64000, 17);
    RunningMoments acc(250);
    for (double v : x) acc.push(2.0 * v);
    const auto e = acc.estimate();
    const double expected = 2.0 / std::sqrt(64000.0);
    CHECK(std::abs(*e.stderr_value - expected) <= 0.2 * expected);
    CHECK(std::abs(e.mean) <= 5 * expected);
}

TEST_CASE("merging disjoint ranges equals a single pass") {
    const auto x = noise(1000, 2);
    RunningMoments whole(50), left(50), right(50);
    for (std::size_t i = 0; i < x.size(); ++i) {
        whole.push(x[i]);
        (i < 500 ? left : right).push(x[i]);
    }
    left.merge(right);
    CHECK(left.count() == whole.count());
    CHECK(left.batch_count() == whole.batch_count());
    CHECK(left.estimate().mean == doctest::Approx(whole.estimate().mean).epsilon(1e-13));
    CHECK(*left.estimate().stderr_value ==
          doctest::Approx(*whole.estimate().stderr_value).epsilon(1e-12));
}

TEST_CASE("averages on synthetic collective Gaussian samples") {
    const std::size_t n = 8;
    const auto cov = inverse_hessian(true, n, 1.0);
    const auto samples = gaussian_samples(cov, 40000, 3);
    const auto first = average([](std::span<const double> phi) { return phi[0]; }, samples, 500);
    CHECK(std::abs(first.estimate().mean) <= 5 * *first.estimate().stderr_value);
    const auto sq = average([](std::span<const double> phi) { return phi[0] * phi[0]; }, samples, 500);
    CHECK(std::abs(sq.estimate().mean - cov(0, 0)) <= 5 * *sq.estimate().stderr_value);
}

TEST_CASE("mode covariance recovers the collective covariance") {
    const std::size_t n = 8;
    const auto cov = inverse_hessian(true, n, 1.0);
    const auto samples = gaussian_samples(cov, 40000, 4);
    const std::vector<std::size_t> sites{0, 3, 5, 7};
    const auto m = mode_covariance(sites, samples, 500);
    int within = 0;
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = 0; j < sites.size(); ++j) {
            CHECK(m.value(i, j) == m.value(j, i));
            within += std::abs(m.value(i, j) - cov(sites[i], sites[j])) <= 5 * m.stderr_value(i, j);
        }
    CHECK(within == 16);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.value);
    CHECK(eig.eigenvalues().minCoeff() >= -5 * m.stderr_value.maxCoeff());

    CHECK_THROWS_AS(ModeCovarianceAccumulator(std::vector<std::size_t>(65, 0), 10), UsageError);
    CHECK_THROWS_AS(ModeCovarianceAccumulator({}, 10), UsageError);
}

TEST_CASE("mode variances agree with the covariance diagonal") {
    const auto samples = gaussian_samples(inverse_hessian(false, 6, 2.0), 8000, 5);
    ModeVarianceAccumulator var(6, 200);
    ModeCovarianceAccumulator cov({0, 1, 2, 3, 4, 5}, 200);
    for (const auto& phi : samples) {
        var.push(phi);
        cov.push(phi);
    }
    const auto v = var.result();
    const auto c = cov.result();
    for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(v.value[i] == doctest::Approx(c.value(i, i)).epsilon(1e-12));
        CHECK(v.stderr_value[i] == doctest::Approx(c.stderr_value(i, i)).epsilon(1e-9));
        CHECK(std::abs(v.value[i] - 0.5) <= 5 * v.stderr_value[i]);
    }
}

TEST_CASE("spread sites") {
    CHECK(spread_sites(8, 4) == std::vector<std::size_t>{1, 3, 5, 7});
    CHECK(spread_sites(343, 1) == std::vector<std::size_t>{171});
    CHECK_THROWS_AS(spread_sites(3, 4), UsageError);
}

TEST_CASE("mgf probe reproduces the covariance") {
    const std::size_t n = 8;
    const auto cov = inverse_hessian(true, n, 1.0);
    const auto samples = gaussian_samples(cov, 40000, 6);
    for (auto [p, q] : {std::pair<std::size_t, std::size_t>{2, 2}, {1, 6}}) {
        MgfProbe probe(p, q, 0.05, 500);
        for (const auto& phi : samples) probe.push(phi);
        const auto e = probe.estimate();
        CHECK(std::abs(e.mean - cov(p, q)) <= 5 * *e.stderr_value + 0.01);
    }

    const auto free_samples = gaussian_samples(inverse_hessian(false, n, 1.0), 40000, 7);
    MgfProbe off(0, 5, 0.05, 500), coarse(3, 3, 0.05, 500), fine(3, 3, 0.025, 500);
    for (const auto& phi : free_samples) {
        off.push(phi);
        coarse.push(phi);
        fine.push(phi);
    }
    CHECK(std::abs(off.estimate().mean) <= 5 * *off.estimate().stderr_value);
    CHECK(std::abs(coarse.estimate().mean - fine.estimate().mean) <
          *coarse.estimate().stderr_value);
}

TEST_CASE("mgf probe reports overflow") {
    MgfProbe probe(0, 0, 10.0, 10);
    CHECK_THROWS_AS(probe.push(std::vector<double>{100.0}), EstimatorError);
    CHECK_THROWS_AS(MgfProbe(0, 0, 0.0, 10), UsageError);
    MgfProbe empty(0, 1, 0.1, 10);
    CHECK_THROWS_AS(empty.estimate(), EstimatorError);
}

TEST_CASE("plane grid order and spacing") {
    PlaneGrid g{3.0, 21, 3.0, 21};
    const auto pts = g.points();
    REQUIRE(pts.size() == 441);
    CHECK(pts[0] == SpacetimePoint{-3.0, -3.0, 0.0, 0.0});
    CHECK(pts[1] == SpacetimePoint{-3.0, -2.7, 0.0, 0.0});
    CHECK(pts[21][0] == doctest::Approx(-2.7));
    CHECK(pts[440] == SpacetimePoint{3.0, 3.0, 0.0, 0.0});
    CHECK(PlaneGrid{1.0, 1, 1.0, 1}.points() == std::vector<SpacetimePoint>{{0, 0, 0, 0}});
}

TEST_CASE("correlator equals the literal double sum") {
    const MomentumLattice lat(5, 0.3);
    const std::size_t n = lat.size();
    const std::vector<SpacetimePoint> pts{{0, 0, 0, 0}, {0.5, -1.0, 0.2, 0.0}, {-1.5, 0.3, 0, 0.7}};
    const auto phi = noise(n, 9);
    for (const auto& shell : {MassShell::fixed(1.0), MassShell::global_dynamic(),
                              MassShell::local_dynamic()}) {
        CorrelatorAccumulator acc(lat, shell, pts, 1);
        acc.push(phi);
        const auto grid = acc.result();
        for (std::size_t g = 0; g < pts.size(); ++g) {
            std::complex<double> direct{};
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    const auto p = lat.momentum(b);
                    const double w = omega(p, effective_mass(shell, phi, b));
                    const double angle =
                        w * pts[g][0] - (p[0] * pts[g][1] + p[1] * pts[g][2] + p[2] * pts[g][3]);
                    direct += phi[a] * phi[b] * std::polar(1.0, angle);
                }
            CHECK(std::abs(grid.values[g] - direct) <= 1e-10 * (1 + std::abs(direct)));
        }
        CHECK(grid.source == "mc");
    }
}

TEST_CASE("fixed-shell correlator converges on Gaussian samples") {
    const MomentumLattice lat(3, 0.4);
    const std::size_t n = lat.size();
    const auto cov = inverse_hessian(true, n, 1.0);
    const auto samples = gaussian_samples(cov, 20000, 10);
    const auto pts = PlaneGrid{2.0, 5, 2.0, 5}.points();
    const auto grid = correlator(lat, MassShell::fixed(1.0), pts, samples, 250);
    for (std::size_t g = 0; g < pts.size(); ++g) {
        std::complex<double> expected{};
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const auto p = lat.momentum(b);
                expected += cov(a, b) * std::polar(1.0, omega(p, 1.0) * pts[g][0] - p[0] * pts[g][1]);
            }
        const auto d = grid.values[g] - expected;
        CHECK(std::abs(d.real()) <= 5 * grid.stderrs[g][0]);
        CHECK(std::abs(d.imag()) <= 5 * grid.stderrs[g][1] + 1e-12);
    }
    // Hermiticity proxy: (-y) against conj(y) within errors.
    const std::size_t last = pts.size() - 1;
    for (std::size_t g = 0; g < pts.size(); ++g) {
        const auto d = grid.values[last - g] - std::conj(grid.values[g]);
        CHECK(std::abs(d.real()) <= 5 * std::hypot(grid.stderrs[g][0], grid.stderrs[last - g][0]));
        CHECK(std::abs(d.imag()) <= 5 * std::hypot(grid.stderrs[g][1], grid.stderrs[last - g][1]) + 1e-12);
    }
}

TEST_CASE("grid scores") {
    CorrelatorGrid a{{{0, 0, 0, 0}, {1, 0, 0, 0}}, {{1.0, 0.0}, {2.0, 1.0}}, {{0.5, 0.1}, {0.0, 0.0}}, "mc"};
    CorrelatorGrid b{a.points, {{2.0, 0.0}, {2.0, 1.0}}, {{0.0, 0.0}, {0.0, 0.0}}, "oracle"};
    const auto z = grid_scores(a, b);
    CHECK(z[0] == 2.0);
    CHECK(z[1] == 0.0);
    b.values[1] = {2.0, 1.5};
    CHECK(std::isinf(grid_scores(a, b)[1]));
    CHECK(fraction_within(std::vector<double>{0.0, 1.0, 6.0, 2.0}, 5.0) == 0.75);
    b.points.pop_back();
    CHECK_THROWS_AS(grid_scores(a, b), UsageError);
}

TEST_CASE("sampling schedule and resumption") {
    const MomentumLattice lat(3, 0.1);
    const auto n = lat.size();
    const IntegratorParams params{0.01, BathParams{1.0, static_cast<double>(n), n}, MatterKind::Free};
    const SamplingPlan plan{100, 1000, 10};
    CHECK(plan.sample_count() == 100);

    std::vector<std::vector<double>> unbroken;
    const FieldSink keep = [&](std::span<const double> phi) { unbroken.emplace_back(phi.begin(), phi.end()); };
    auto s = init_state(lat, params.bath, params.kind, 1);
    sample_trajectory(s, params, plan, std::span(&keep, 1));
    CHECK(unbroken.size() == 100);
    CHECK(s.step_count == 1100);

    std::vector<std::vector<double>> split;
    const FieldSink keep2 = [&](std::span<const double> phi) { split.emplace_back(phi.begin(), phi.end()); };
    auto t = init_state(lat, params.bath, params.kind, 1);
    sample_trajectory(t, params, SamplingPlan{100, 437, 10}, std::span(&keep2, 1));
    sample_trajectory(t, params, plan, std::span(&keep2, 1));
    CHECK(split == unbroken);
    CHECK(t == s);

    // The first sample is the field after step equilibration + thin.
    auto u = run(init_state(lat, params.bath, params.kind, 1), params, 110);
    CHECK(u.phi == unbroken.front());
    CHECK_THROWS_AS((SamplingPlan{0, 10, 0}.validate()), UsageError);
}
