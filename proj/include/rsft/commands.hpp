#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsft/config.hpp"

namespace rsft {

struct CommandOptions {
    /// Apply the pass/fail gate to commands whose comparison is otherwise
    /// only reported (simulate, correlator, covariance).
    bool check = false;
    /// simulate: stop after this many total steps, leaving a checkpoint.
    std::optional<std::uint64_t> stop_after;
    /// resume: checkpoint to continue from.
    std::string checkpoint_path;
    /// microcausality: "oracle" (exact covariance) or "mc".
    std::string source = "oracle";
};

struct CommandReport {
    bool passed = true;
    std::vector<std::string> files;
    std::vector<std::string> lines; // human-readable summary
};

inline constexpr const char* kCheckpointFile = "checkpoint.rsft";
inline constexpr const char* kConservationFile = "conservation.csv";
inline constexpr double kConservationTolerance = 1e-3;
inline constexpr double kAgreementSigmas = 5.0;
inline constexpr double kAgreementFraction = 0.95;
inline constexpr double kMicrocausalityBound = 0.05;
inline constexpr double kOracleMatchTolerance = 1e-10;

CommandReport run_simulate(const RunConfig& config, const CommandOptions& options);
CommandReport run_resume(const RunConfig& config, const CommandOptions& options);
CommandReport run_correlator(const RunConfig& config, const CommandOptions& options);
CommandReport run_covariance(const RunConfig& config, const CommandOptions& options);
CommandReport run_mgf_check(const RunConfig& config, const CommandOptions& options);
CommandReport run_fock_check(const RunConfig& config, const CommandOptions& options);
CommandReport run_microcausality(const RunConfig& config, const CommandOptions& options);

/// Dispatch by subcommand name; throws UsageError for unknown names.
CommandReport run_command(std::string_view name, const RunConfig& config,
                          const CommandOptions& options);

const std::vector<std::string>& command_names();

} // namespace rsft
