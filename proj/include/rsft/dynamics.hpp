#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>

#include "rsft/action.hpp"
#include "rsft/error.hpp"
#include "rsft/lattice.hpp"
#include "rsft/state.hpp"

namespace rsft {

/// The repository's one random generator. Its algorithm and text state
/// format are fixed by the C++ standard, so draws are platform independent.
using Generator = std::mt19937_64;
inline constexpr const char* kGeneratorId = "mt19937_64";

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Generator& gen);

struct IntegratorParams {
    double dlambda = 0.01;
    BathParams bath;
    MatterKind kind = MatterKind::Free;

    void validate() const;
};

/// phi = 0, pi_phi(p) ~ U[-2.5, 2.5] drawn in site order, s = 1, pi_s = 0,
/// S^0 = S^x of the drawn state.
ExtendedState init_state(const MomentumLattice& lattice, const BathParams& bath,
                         MatterKind kind, Generator& gen);
ExtendedState init_state(const MomentumLattice& lattice, const BathParams& bath,
                         MatterKind kind, std::uint64_t seed);

enum class StepStage { BathHalfKick, BathDrift };

const char* to_string(StepStage stage) noexcept;

class StepFailure : public Error {
public:
    StepFailure(StepStage stage, const std::string& detail,
                std::optional<std::uint64_t> step = std::nullopt);

    const char* kind() const noexcept override { return "step_failure"; }
    StepStage stage() const noexcept { return stage_; }
    std::optional<std::uint64_t> step() const noexcept { return step_; }

    StepFailure at_step(std::uint64_t step) const { return {stage_, detail_, step}; }

private:
    StepStage stage_;
    std::string detail_;
    std::optional<std::uint64_t> step_;
};

/// Root of x = pi_s + c * (rest - x^2 / (2 m_s)) that tends to the explicit
/// value pi_s + c * rest as c -> 0. Throws StepFailure on a negative
/// discriminant.
double solve_bath_half_kick(double pi_s, double c, double rest, double m_s);

/// One generalized-leapfrog step of S = s (S^x - S^0), in place. On failure
/// the state is left partially updated; use leapfrog_step to keep it.
void advance(ExtendedState& state, const IntegratorParams& params);

ExtendedState leapfrog_step(ExtendedState state, const IntegratorParams& params);

/// Called after every step. Must not retain or mutate the state.
using Observer = std::function<void(const ExtendedState&)>;

void run_in_place(ExtendedState& state, const IntegratorParams& params, std::uint64_t n_steps,
                  std::span<const Observer> observers = {});

ExtendedState run(ExtendedState state, const IntegratorParams& params, std::uint64_t n_steps,
                  std::span<const Observer> observers = {});

} // namespace rsft
