#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rsft/action.hpp"
#include "rsft/dynamics.hpp"
#include "rsft/estimators.hpp"
#include "rsft/lattice.hpp"

namespace rsft {

/// Fully resolved run configuration.
struct RunConfig {
    std::string preset; // empty when none was given

    int n_per_axis = 0;
    double spacing = 0.0;
    double beta = 0.0;
    double mass = 0.0;
    std::optional<double> m_s; // nullopt: N
    MatterKind kind = MatterKind::Free;
    MassShell::Kind shell = MassShell::Kind::Fixed;
    double dlambda = 0.0;
    std::uint64_t equilibration_steps = 0;
    std::uint64_t sampling_steps = 0;
    std::uint64_t thin_stride = 10;
    std::uint64_t seed = 0;
    PlaneGrid grid;
    std::string output_dir = ".";

    std::uint64_t checkpoint_interval = 100000; // 0 disables periodic checkpoints
    std::uint64_t log_interval = 1000;
    std::uint64_t batch_length = 0;             // 0: default_batch_length
    std::size_t covariance_sites = 8;
    double mgf_epsilon = 0.05;
    std::size_t mgf_pairs = 4;
    int fock_n_max = 4;
    std::size_t fock_observables = 3;
    double packet_width = 0.3;
    double packet_separation = 1.5;

    MomentumLattice lattice() const { return {n_per_axis, spacing}; }
    BathParams bath() const;
    IntegratorParams integrator() const;
    MassShell mass_shell() const;
    SamplingPlan plan() const;
    std::size_t resolved_batch_length() const;

    /// Every key in canonical order, `key = value` per line. Parsing the
    /// result gives back an identical config.
    std::string to_text() const;

    void validate() const;
};

/// `key = value` lines with `#` comments. `preset = name` fills defaults
/// wherever it appears; explicit keys override it.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::string& path);

/// Names accepted by `preset`.
bool is_preset(std::string_view name);

} // namespace rsft
