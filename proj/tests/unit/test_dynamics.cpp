#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "rsft/action.hpp"
#include "rsft/dynamics.hpp"

using namespace rsft;

namespace {

IntegratorParams params_for(const MomentumLattice& lat, MatterKind kind, double h) {
    const auto n = lat.size();
    return {h, BathParams{1.0, static_cast<double>(n), n}, kind};
}

double max_abs_action(ExtendedState s, const IntegratorParams& p, std::uint64_t steps) {
    double worst = 0.0;
    const Observer obs = [&](const ExtendedState& x) {
        worst = std::max(worst, std::abs(total_action(x, p.kind, p.bath)));
    };
    run_in_place(s, p, steps, std::span(&obs, 1));
    return worst;
}

} // namespace

TEST_CASE("uniform01 uses the top 53 bits") {
    Generator a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        const double u = uniform01(a);
        CHECK(u == static_cast<double>(b() >> 11) * 0x1.0p-53);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("initial state follows the draw contract") {
    const MomentumLattice lat(7, 0.1);
    const auto p = params_for(lat, MatterKind::FreeCollective, 0.01);
    const auto s = init_state(lat, p.bath, p.kind, 99);
    Generator gen(99);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        CHECK(s.phi[i] == 0.0);
        CHECK(s.pi_phi[i] == -2.5 + 5.0 * uniform01(gen));
    }
    CHECK(s.s == 1.0);
    CHECK(s.pi_s == 0.0);
    CHECK(s.step_count == 0);
    CHECK(total_action(s, p.kind, p.bath) == 0.0);
    CHECK(s.s0 == extended_action(s, p.kind, p.bath));
}

TEST_CASE("initial momenta have mean square near 25/12") {
    const MomentumLattice lat(7, 0.1);
    const auto p = params_for(lat, MatterKind::Free, 0.01);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto s = init_state(lat, p.bath, p.kind, seed);
        double sum = 0.0;
        for (double x : s.pi_phi) sum += x * x;
        const double v = sum / (2.0 * static_cast<double>(lat.size()));
        CHECK(v >= 0.8);
        CHECK(v <= 1.3);
    }
}

TEST_CASE("equal seeds give bitwise-equal trajectories") {
    const MomentumLattice lat(5, 0.1);
    const auto p = params_for(lat, MatterKind::FreeCollective, 0.01);
    const auto a = run(init_state(lat, p.bath, p.kind, 3), p, 2000);
    const auto b = run(init_state(lat, p.bath, p.kind, 3), p, 2000);
    CHECK(a == b);
    const auto c = run(init_state(lat, p.bath, p.kind, 4), p, 2000);
    CHECK_FALSE(a == c);
}

TEST_CASE("run composes and zero steps is the identity") {
    const MomentumLattice lat(3, 0.1);
    const auto p = params_for(lat, MatterKind::Free, 0.01);
    const auto s = init_state(lat, p.bath, p.kind, 1);
    CHECK(run(s, p, 0) == s);
    CHECK(run(run(s, p, 300), p, 700) == run(s, p, 1000));

    int calls = 0;
    std::uint64_t last = 0;
    const Observer count = [&](const ExtendedState& x) {
        ++calls;
        last = x.step_count;
    };
    const auto out = run(s, p, 25, std::span(&count, 1));
    CHECK(calls == 25);
    CHECK(last == 25);
    CHECK(out.lambda == 25 * 0.01);
}

TEST_CASE("bath half-kick root") {
    // phi = 0, pi = 0, pi_s = 0, s = 1: x = -c (n_f/beta + x^2 / (2 m_s)).
    const double h = 0.01, c = h / 2, nf = 343.0, m_s = 343.0;
    const double x = solve_bath_half_kick(0.0, c, -nf, m_s);
    double y = -c * nf;
    for (int i = 0; i < 200; ++i) y = -c * (nf + y * y / (2 * m_s));
    CHECK(x == doctest::Approx(y).epsilon(1e-14));
    CHECK(x == doctest::Approx(-c * nf).epsilon(1e-3));
    CHECK(std::abs(x - c * (-nf - x * x / (2 * m_s))) < 1e-13);

    // Smaller c approaches the explicit value, with an O(c) quadratic correction.
    for (double cc : {1e-2, 1e-4, 1e-6}) {
        const double r = solve_bath_half_kick(0.3, cc, 2.0, 1.0);
        const double b = 0.3 + cc * 2.0;
        CHECK(std::abs(r - b) <= cc * b * b);
        CHECK(std::abs(r - (b - cc * b * b / 2)) <= 10 * cc * cc * b * b * b);
    }
    CHECK_THROWS_AS(solve_bath_half_kick(-100.0, 0.5, 0.0, 1.0), StepFailure);
}

TEST_CASE("step failures carry stage and step index") {
    const MomentumLattice lat(2, 0.1);
    IntegratorParams p{0.5, BathParams{1.0, 1.0, 8}, MatterKind::Free};
    auto s = init_state(lat, p.bath, p.kind, 1);
    s.pi_s = -50.0;
    const auto before = s;
    try {
        (void)leapfrog_step(s, p);
        FAIL("expected a step failure");
    } catch (const StepFailure& e) {
        CHECK(e.stage() == StepStage::BathHalfKick);
        CHECK_FALSE(e.step().has_value());
    }
    CHECK(s == before);

    s.step_count = 41;
    try {
        run_in_place(s, p, 3);
        FAIL("expected a step failure");
    } catch (const StepFailure& e) {
        CHECK(e.step() == std::optional<std::uint64_t>(42));
        CHECK(std::string(e.kind()) == "step_failure");
    }
}

TEST_CASE("s stays positive and total action stays small") {
    const MomentumLattice lat(5, 0.1);
    const auto p = params_for(lat, MatterKind::FreeCollective, 0.01);
    auto s = init_state(lat, p.bath, p.kind, 8);
    bool positive = true;
    const Observer obs = [&](const ExtendedState& x) { positive = positive && x.s > 0.0; };
    run_in_place(s, p, 20000, std::span(&obs, 1));
    CHECK(positive);
    CHECK(max_abs_action(init_state(lat, p.bath, p.kind, 8), p, 20000) < 0.05);
}

TEST_CASE("action drift shrinks quadratically in the step") {
    const MomentumLattice lat(5, 0.1);
    const auto coarse = params_for(lat, MatterKind::FreeCollective, 0.01);
    const auto fine = params_for(lat, MatterKind::FreeCollective, 0.005);
    const auto s = init_state(lat, coarse.bath, coarse.kind, 2);
    const double a = max_abs_action(s, coarse, 10000);
    const double b = max_abs_action(s, fine, 20000);
    CHECK(a / b >= 3.0);
    CHECK(a / b <= 5.0);
}

TEST_CASE("forward, flip, backward returns to the start") {
    const MomentumLattice lat(7, 0.1);
    const auto p = params_for(lat, MatterKind::FreeCollective, 0.01);
    const auto start = init_state(lat, p.bath, p.kind, 5);
    auto s = run(start, p, 10000);
    for (auto& x : s.pi_phi) x = -x;
    s.pi_s = -s.pi_s;
    s = run(s, p, 10000);
    double err = std::abs(s.s - start.s) + 0.0;
    err = std::max(err, std::abs(-s.pi_s - start.pi_s));
    for (std::size_t i = 0; i < s.size(); ++i) {
        err = std::max(err, std::abs(s.phi[i] - start.phi[i]));
        err = std::max(err, std::abs(-s.pi_phi[i] - start.pi_phi[i]));
    }
    CHECK(err <= 1e-6);
}

TEST_CASE("one step preserves phase-space volume for a single mode") {
    for (auto kind : {MatterKind::Free, MatterKind::FreeCollective}) {
        IntegratorParams p{0.01, BathParams{1.0, 1.0, 1}, kind};
        ExtendedState base;
        base.phi = {0.3};
        base.pi_phi = {0.8};
        base.s = 1.1;
        base.pi_s = -0.2;
        base.s0 = 0.25;
        auto pack = [](const ExtendedState& x) {
            return std::array<double, 4>{x.phi[0], x.pi_phi[0], x.s, x.pi_s};
        };
        auto unpack = [&](const std::array<double, 4>& v) {
            auto x = base;
            x.phi[0] = v[0];
            x.pi_phi[0] = v[1];
            x.s = v[2];
            x.pi_s = v[3];
            return x;
        };
        const double eps = 1e-6;
        Eigen::Matrix4d jac;
        for (int j = 0; j < 4; ++j) {
            auto up = pack(base), down = pack(base);
            up[j] += eps;
            down[j] -= eps;
            const auto fu = pack(leapfrog_step(unpack(up), p));
            const auto fd = pack(leapfrog_step(unpack(down), p));
            for (int i = 0; i < 4; ++i) jac(i, j) = (fu[i] - fd[i]) / (2 * eps);
        }
        CHECK(std::abs(jac.determinant() - 1.0) <= 1e-8);
    }
}

TEST_CASE("integrator parameters are validated") {
    IntegratorParams p{0.0, BathParams{1.0, 1.0, 1}, MatterKind::Free};
    CHECK_THROWS_AS(p.validate(), UsageError);
    p.dlambda = -0.01;
    CHECK_THROWS_AS(p.validate(), UsageError);
    p.dlambda = 0.01;
    CHECK_NOTHROW(p.validate());
}
