#include "rsft/dynamics.hpp"

#include <cmath>

#include "rsft/kernels.hpp"

namespace rsft {

namespace k = kernels::omp;

double uniform01(Generator& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void IntegratorParams::validate() const {
    if (!(dlambda > 0.0) || !std::isfinite(dlambda)) throw UsageError("dlambda must be positive");
    bath.validate();
}

ExtendedState init_state(const MomentumLattice& lattice, const BathParams& bath,
                         MatterKind kind, Generator& gen) {
    bath.validate();
    const std::size_t n = lattice.size();
    ExtendedState state;
    state.phi.assign(n, 0.0);
    state.pi_phi.resize(n);
    for (std::size_t i = 0; i < n; ++i) state.pi_phi[i] = -2.5 + 5.0 * uniform01(gen);
    state.s = 1.0;
    state.pi_s = 0.0;
    state.s0 = extended_action(state, kind, bath);
    return state;
}

ExtendedState init_state(const MomentumLattice& lattice, const BathParams& bath,
                         MatterKind kind, std::uint64_t seed) {
    Generator gen(seed);
    return init_state(lattice, bath, kind, gen);
}

const char* to_string(StepStage stage) noexcept {
    return stage == StepStage::BathHalfKick ? "bath_half_kick" : "bath_drift";
}

StepFailure::StepFailure(StepStage stage, const std::string& detail,
                         std::optional<std::uint64_t> step)
    : Error(std::string("step failed at ") + to_string(stage) +
            (step ? " (step " + std::to_string(*step) + ")" : std::string()) + ": " + detail +
            "; retry with a smaller dlambda"),
      stage_(stage), detail_(detail), step_(step) {}

double solve_bath_half_kick(double pi_s, double c, double rest, double m_s) {
    const double b = pi_s + c * rest;
    const double disc = 1.0 + 2.0 * c * b / m_s;
    if (!(disc >= 0.0)) throw StepFailure(StepStage::BathHalfKick, "negative discriminant");
    return 2.0 * b / (1.0 + std::sqrt(disc));
}

void advance(ExtendedState& state, const IntegratorParams& params) {
    const double h = params.dlambda;
    const double c = 0.5 * h;
    const double m_s = params.bath.m_s;
    const double nf_over_beta = static_cast<double>(params.bath.n_f) / params.bath.beta;
    auto& phi = state.phi;
    auto& pi = state.pi_phi;

    // Bracket of dpi_s/dlambda without the (pi_s)^2/(2 m_s) term.
    auto bath_force_rest = [&](double s) {
        const double k2 = k::dot(pi, pi) / (s * s);
        return k2 - nf_over_beta -
               (0.5 * k2 + matter_action(params.kind, phi) + nf_over_beta * std::log(s) - state.s0);
    };

    k::kick(pi, phi, c * state.s, matter_grad_shift(params.kind, phi));

    const double pi_s_half = solve_bath_half_kick(state.pi_s, c, bath_force_rest(state.s), m_s);

    const double a = h * pi_s_half / (2.0 * m_s);
    if (!(a < 1.0 && a > -1.0))
        throw StepFailure(StepStage::BathDrift, "s update would leave (0, inf)");
    const double s_new = state.s * (1.0 + a) / (1.0 - a);
    if (!(s_new > 0.0) || !std::isfinite(s_new))
        throw StepFailure(StepStage::BathDrift, "s update would leave (0, inf)");
    k::drift(phi, pi, c * (1.0 / state.s + 1.0 / s_new));
    state.s = s_new;

    state.pi_s = pi_s_half +
                 c * (bath_force_rest(state.s) - pi_s_half * pi_s_half / (2.0 * m_s));

    k::kick(pi, phi, c * state.s, matter_grad_shift(params.kind, phi));

    ++state.step_count;
    state.lambda = static_cast<double>(state.step_count) * h;
}

ExtendedState leapfrog_step(ExtendedState state, const IntegratorParams& params) {
    if (!(state.s > 0.0)) throw DomainError("leapfrog_step needs s > 0");
    advance(state, params);
    return state;
}

void run_in_place(ExtendedState& state, const IntegratorParams& params, std::uint64_t n_steps,
                  std::span<const Observer> observers) {
    params.validate();
    if (!(state.s > 0.0)) throw DomainError("run needs s > 0");
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        try {
            advance(state, params);
        } catch (const StepFailure& e) {
            throw e.at_step(state.step_count + 1);
        }
        for (const auto& observe : observers) observe(state);
    }
}

ExtendedState run(ExtendedState state, const IntegratorParams& params, std::uint64_t n_steps,
                  std::span<const Observer> observers) {
    run_in_place(state, params, n_steps, observers);
    return state;
}

} // namespace rsft
