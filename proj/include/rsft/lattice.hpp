#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace rsft {

using Momentum = std::array<double, 3>;

/// Cubic momentum-space lattice centred on the origin. Site (a, b, c) has
/// momentum ((a - (n-1)/2) * spacing, ...) and flat index (a*n + b)*n + c.
class MomentumLattice {
public:
    MomentumLattice(int n_per_axis, double spacing);

    int n_per_axis() const noexcept { return n_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return size_; }

    std::size_t index(int a, int b, int c) const;
    std::array<int, 3> coordinates(std::size_t index) const;
    Momentum momentum(std::size_t index) const;

    /// Site whose momentum is closest to p (clamped to the cube).
    std::size_t nearest_index(const Momentum& p) const;

    /// Index of the site at -p. Exact: negating a centred coordinate is exact.
    std::size_t mirror(std::size_t index) const noexcept { return size_ - 1 - index; }

    /// Largest |p_i| on the lattice.
    double extent() const noexcept { return 0.5 * (n_ - 1) * spacing_; }

    std::vector<Momentum> momenta() const;

private:
    double axis_value(int a) const noexcept { return (a - 0.5 * (n_ - 1)) * spacing_; }

    int n_;
    double spacing_;
    std::size_t size_;
};

/// Positive mass-shell frequency sqrt(|p|^2 + m^2).
double omega(const Momentum& p, double mass) noexcept;

/// How the mass entering omega is obtained at a given field configuration.
struct MassShell {
    enum class Kind { Fixed, GlobalDynamic, LocalDynamic };

    Kind kind = Kind::Fixed;
    double mass = 1.0; // used by Fixed only

    static MassShell fixed(double m);
    static MassShell global_dynamic() { return {Kind::GlobalDynamic, 0.0}; }
    static MassShell local_dynamic() { return {Kind::LocalDynamic, 0.0}; }

    bool is_fixed() const noexcept { return kind == Kind::Fixed; }
};

const char* to_string(MassShell::Kind kind) noexcept;

double effective_mass(const MassShell& shell, std::span<const double> phi, std::size_t index);

/// All per-site masses in one O(N) pass.
void effective_masses(const MassShell& shell, std::span<const double> phi, std::span<double> out);

/// Per-site omega for the current field.
void shell_frequencies(const MomentumLattice& lattice, const MassShell& shell,
                       std::span<const double> phi, std::span<double> out);

} // namespace rsft

namespace rsft {

/// Minkowski point (y0, y1, y2, y3).
using SpacetimePoint = std::array<double, 4>;

} // namespace rsft
