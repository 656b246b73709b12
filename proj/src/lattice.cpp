#include "rsft/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsft/error.hpp"
#include "rsft/kernels.hpp"

namespace rsft {

MomentumLattice::MomentumLattice(int n_per_axis, double spacing)
    : n_(n_per_axis), spacing_(spacing) {
    if (n_per_axis <= 0) throw UsageError("n_per_axis must be positive");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw UsageError("spacing must be positive");
    size_ = static_cast<std::size_t>(n_) * n_ * n_;
}

std::size_t MomentumLattice::index(int a, int b, int c) const {
    if (a < 0 || a >= n_ || b < 0 || b >= n_ || c < 0 || c >= n_)
        throw UsageError("site coordinates out of range");
    return (static_cast<std::size_t>(a) * n_ + b) * n_ + c;
}

std::array<int, 3> MomentumLattice::coordinates(std::size_t index) const {
    if (index >= size_)
        throw UsageError("site index " + std::to_string(index) + " out of range [0, " +
                         std::to_string(size_) + ")");
    const auto n = static_cast<std::size_t>(n_);
    return {static_cast<int>(index / (n * n)), static_cast<int>((index / n) % n),
            static_cast<int>(index % n)};
}

Momentum MomentumLattice::momentum(std::size_t index) const {
    const auto [a, b, c] = coordinates(index);
    return {axis_value(a), axis_value(b), axis_value(c)};
}

std::size_t MomentumLattice::nearest_index(const Momentum& p) const {
    std::array<int, 3> abc{};
    for (int i = 0; i < 3; ++i) {
        const double a = std::round(p[i] / spacing_ + 0.5 * (n_ - 1));
        abc[i] = static_cast<int>(std::clamp(a, 0.0, static_cast<double>(n_ - 1)));
    }
    return index(abc[0], abc[1], abc[2]);
}

std::vector<Momentum> MomentumLattice::momenta() const {
    std::vector<Momentum> out(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = momentum(i);
    return out;
}

double omega(const Momentum& p, double mass) noexcept {
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + mass * mass);
}

MassShell MassShell::fixed(double m) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw UsageError("mass must be nonnegative");
    return {Kind::Fixed, m};
}

const char* to_string(MassShell::Kind kind) noexcept {
    switch (kind) {
    case MassShell::Kind::Fixed: return "fixed";
    case MassShell::Kind::GlobalDynamic: return "global_dynamic";
    case MassShell::Kind::LocalDynamic: return "local_dynamic";
    }
    return "?";
}

double effective_mass(const MassShell& shell, std::span<const double> phi, std::size_t index) {
    switch (shell.kind) {
    case MassShell::Kind::Fixed: return shell.mass;
    case MassShell::Kind::GlobalDynamic: return std::abs(kernels::serial::sum(phi));
    case MassShell::Kind::LocalDynamic:
        if (index >= phi.size()) throw UsageError("site index out of range");
        return std::abs(phi[index]);
    }
    return 0.0;
}

void effective_masses(const MassShell& shell, std::span<const double> phi, std::span<double> out) {
    switch (shell.kind) {
    case MassShell::Kind::Fixed: std::fill(out.begin(), out.end(), shell.mass); break;
    case MassShell::Kind::GlobalDynamic:
        std::fill(out.begin(), out.end(), std::abs(kernels::serial::sum(phi)));
        break;
    case MassShell::Kind::LocalDynamic:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(phi[i]);
        break;
    }
}

void shell_frequencies(const MomentumLattice& lattice, const MassShell& shell,
                       std::span<const double> phi, std::span<double> out) {
    effective_masses(shell, phi, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = omega(lattice.momentum(i), out[i]);
}

} // namespace rsft
