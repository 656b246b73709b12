#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rsft/state.hpp"

namespace rsft {

/// Free:           S = sum_p phi(p)^2 / 2
/// FreeCollective: S = sum_p phi(p)^2 / 2 + (sum_p phi(p))^2 / 2
enum class MatterKind { Free, FreeCollective };

const char* to_string(MatterKind kind) noexcept;

struct BathParams {
    double beta = 1.0;
    double m_s = 1.0;
    std::size_t n_f = 1;

    /// Throws UsageError on beta <= 0, m_s <= 0 or n_f == 0.
    void validate() const;
};

double matter_action(MatterKind kind, std::span<const double> phi);

void matter_grad(MatterKind kind, std::span<const double> phi, std::span<double> out);
std::vector<double> matter_grad(MatterKind kind, std::span<const double> phi);

/// The constant added to phi(p) in the gradient: 0 for Free, sum_q phi(q)
/// for FreeCollective. The force is then elementwise.
double matter_grad_shift(MatterKind kind, std::span<const double> phi);

/// Pieces of S^x that the integrator needs separately.
struct ActionTerms {
    double kinetic;  // sum_p pi_phi^2 / (2 s^2)
    double bath;     // pi_s^2 / (2 m_s)
    double matter;   // S^m[phi]
    double log_term; // (n_f / beta) ln s

    double extended() const noexcept { return kinetic + bath + matter + log_term; }
};

ActionTerms action_terms(const ExtendedState& state, MatterKind kind, const BathParams& bath);

/// S^x. Throws DomainError when s <= 0.
double extended_action(const ExtendedState& state, MatterKind kind, const BathParams& bath);

/// s (S^x - S^0): the conserved quantity, 0 at initialisation.
double total_action(const ExtendedState& state, MatterKind kind, const BathParams& bath);

} // namespace rsft
