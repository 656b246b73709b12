#pragma once

#include <cstdint>
#include <vector>

namespace rsft {

/// Point of the variational phase space plus bookkeeping.
struct ExtendedState {
    std::vector<double> phi;    // field on the lattice sites
    std::vector<double> pi_phi; // conjugate field
    double s = 1.0;             // bath scalar, always > 0
    double pi_s = 0.0;          // bath momentum
    double s0 = 0.0;            // extended action at lambda = 0
    std::uint64_t step_count = 0;
    double lambda = 0.0;        // step_count * dlambda

    std::size_t size() const noexcept { return phi.size(); }

    friend bool operator==(const ExtendedState&, const ExtendedState&) = default;
};

} // namespace rsft
