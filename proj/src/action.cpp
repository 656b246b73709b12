#include "rsft/action.hpp"

#include <cmath>

#include "rsft/error.hpp"
#include "rsft/kernels.hpp"

namespace rsft {

namespace k = kernels::omp;

const char* to_string(MatterKind kind) noexcept {
    return kind == MatterKind::Free ? "free" : "free_collective";
}

void BathParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("beta must be positive");
    if (!(m_s > 0.0) || !std::isfinite(m_s)) throw UsageError("m_s must be positive");
    if (n_f == 0) throw UsageError("n_f must be at least 1");
}

double matter_action(MatterKind kind, std::span<const double> phi) {
    double s = 0.5 * k::dot(phi, phi);
    if (kind == MatterKind::FreeCollective) {
        const double total = k::sum(phi);
        s += 0.5 * total * total;
    }
    return s;
}

double matter_grad_shift(MatterKind kind, std::span<const double> phi) {
    return kind == MatterKind::FreeCollective ? k::sum(phi) : 0.0;
}

void matter_grad(MatterKind kind, std::span<const double> phi, std::span<double> out) {
    if (out.size() != phi.size()) throw UsageError("gradient buffer has the wrong length");
    const double shift = matter_grad_shift(kind, phi);
    for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] + shift;
}

std::vector<double> matter_grad(MatterKind kind, std::span<const double> phi) {
    std::vector<double> out(phi.size());
    matter_grad(kind, phi, out);
    return out;
}

ActionTerms action_terms(const ExtendedState& state, MatterKind kind, const BathParams& bath) {
    if (!(state.s > 0.0)) throw DomainError("extended action needs s > 0");
    const double nf_over_beta = static_cast<double>(bath.n_f) / bath.beta;
    return {
        k::dot(state.pi_phi, state.pi_phi) / (2.0 * state.s * state.s),
        state.pi_s * state.pi_s / (2.0 * bath.m_s),
        matter_action(kind, state.phi),
        nf_over_beta * std::log(state.s),
    };
}

double extended_action(const ExtendedState& state, MatterKind kind, const BathParams& bath) {
    return action_terms(state, kind, bath).extended();
}

double total_action(const ExtendedState& state, MatterKind kind, const BathParams& bath) {
    return state.s * (extended_action(state, kind, bath) - state.s0);
}

} // namespace rsft
