#include "rsft/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <fmt/format.h>

#include "rsft/checkpoint.hpp"
#include "rsft/csv_output.hpp"
#include "rsft/error.hpp"
#include "rsft/operator_algebra.hpp"
#include "rsft/oracles.hpp"

namespace rsft {

namespace fs = std::filesystem;

namespace {

std::string output_path(const RunConfig& config, const char* name) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.output_dir + "': " + ec.message());
    return (fs::path(config.output_dir) / name).string();
}

void emit(CommandReport& report, const RunConfig& config, const char* name,
          const std::string& content) {
    const auto path = output_path(config, name);
    write_text_file(path, content);
    report.files.push_back(path);
}

std::string verdict(bool ok) { return ok ? "pass" : "fail"; }

// ---------------------------------------------------------------------------
// simulate / resume

constexpr const char* kConservationColumns = "step,lambda,total_action,s,pi_s\n";

struct ConservationLog {
    std::string text;
    double max_abs = 0.0;

    void record(const ExtendedState& state, const IntegratorParams& params) {
        const double total = total_action(state, params.kind, params.bath);
        max_abs = std::max(max_abs, std::abs(total));
        text += fmt::format("{},{},{},{},{}\n", state.step_count, csv_real(state.lambda),
                            csv_real(total), csv_real(state.s), csv_real(state.pi_s));
    }
};

CommandReport drive_simulation(const RunConfig& config, const CommandOptions& options,
                               ExtendedState& state, const Generator& generator,
                               ConservationLog& log) {
    const auto params = config.integrator();
    const auto log_path = output_path(config, kConservationFile);
    const auto ckpt_path = output_path(config, kCheckpointFile);

    const std::uint64_t total = config.plan().total_steps();
    const std::uint64_t end = options.stop_after ? std::min(total, *options.stop_after) : total;

    auto save = [&](const ExtendedState& s) {
        write_text_file(log_path, log.text);
        write_checkpoint(s, generator, ckpt_path);
    };
    const Observer observer = [&](const ExtendedState& s) {
        if (s.step_count % config.log_interval == 0) log.record(s, params);
        if (config.checkpoint_interval != 0 && s.step_count % config.checkpoint_interval == 0)
            save(s);
    };
    if (state.step_count < end)
        run_in_place(state, params, end - state.step_count, std::span(&observer, 1));
    save(state);

    CommandReport report;
    report.files = {log_path, ckpt_path};
    report.lines.push_back(fmt::format("steps {} of {}", state.step_count, total));
    report.lines.push_back(fmt::format("max |total action| {:.6e}", log.max_abs));
    if (options.check) {
        report.passed = log.max_abs <= kConservationTolerance;
        report.lines.push_back(fmt::format("conservation <= {:g}: {}", kConservationTolerance,
                                           verdict(report.passed)));
    }
    return report;
}

// Keeps the comment block, the column line and rows up to `last_step`.
ConservationLog truncate_log(const std::string& text, const std::string& header,
                             std::uint64_t last_step) {
    if (!text.starts_with(header + kConservationColumns))
        throw UsageError("conservation log was written with a different config");
    ConservationLog log{header + kConservationColumns, 0.0};
    std::istringstream rows(text.substr(log.text.size()));
    for (std::string row; std::getline(rows, row);) {
        std::uint64_t step = 0;
        const auto c1 = row.find(',');
        const auto c2 = row.find(',', c1 + 1);
        const auto c3 = row.find(',', c2 + 1);
        if (c1 == std::string::npos || c3 == std::string::npos)
            throw LoadError("malformed conservation log row '" + row + "'");
        std::from_chars(row.data(), row.data() + c1, step);
        if (step > last_step) break;
        double total = 0.0;
        std::from_chars(row.data() + c2 + 1, row.data() + c3, total);
        log.max_abs = std::max(log.max_abs, std::abs(total));
        log.text += row + "\n";
    }
    return log;
}

// ---------------------------------------------------------------------------

ExtendedState initial_state(const RunConfig& config) {
    Generator generator(config.seed);
    return init_state(config.lattice(), config.bath(), config.kind, generator);
}

void sample(const RunConfig& config, std::span<const FieldSink> sinks) {
    auto state = initial_state(config);
    sample_trajectory(state, config.integrator(), config.plan(), sinks);
}

std::string covariance_block_csv(const CovarianceMatrix& m, const ExactCovariance& oracle,
                                 std::vector<double>& scores) {
    std::string out = "i,j,site_i,site_j,value,stderr,oracle,score\n";
    const auto k = m.sites.size();
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double expected = oracle(m.sites[i], m.sites[j]);
            const double diff = m.value(i, j) - expected;
            const double se = m.stderr_value(i, j);
            const double z = diff == 0.0 ? 0.0 : (se > 0.0 ? std::abs(diff) / se : INFINITY);
            if (j >= i) scores.push_back(z);
            out += fmt::format("{},{},{},{},{},{},{},{}\n", i, j, m.sites[i], m.sites[j],
                               csv_real(m.value(i, j)), csv_real(se), csv_real(expected),
                               csv_real(z));
        }
    return out;
}

// Packets at distinct centres, scaled to unit norm under `covariance`.
std::vector<LinearObservable> fock_observables(const RunConfig& config,
                                               const MomentumLattice& lattice,
                                               const ExactCovariance& covariance) {
    std::vector<LinearObservable> out;
    for (std::size_t k = 0; k < config.fock_observables; ++k) {
        const double t = static_cast<double>(k);
        Packet packet;
        packet.center = {0.4 * t, 0.7 * t, -0.2 * t, 0.1 * t};
        packet.width = config.packet_width;
        auto o = packet_observable(packet, lattice, config.mass);
        o.label = fmt::format("packet_{}", k);
        const double norm = std::sqrt(covariance.bilinear(o.coefficients, o.coefficients).real());
        for (auto& c : o.coefficients) c /= norm;
        out.push_back(std::move(o));
    }
    return out;
}

std::pair<PacketPair, PacketPair> packet_pairs(const RunConfig& config) {
    Packet origin;
    origin.width = config.packet_width;
    Packet space = origin, time = origin;
    space.center = {0.0, config.packet_separation, 0.0, 0.0};
    time.center = {config.packet_separation, 0.0, 0.0, 0.0};
    return {{origin, space}, {origin, time}};
}

} // namespace

CommandReport run_simulate(const RunConfig& config, const CommandOptions& options) {
    Generator generator(config.seed);
    auto state = init_state(config.lattice(), config.bath(), config.kind, generator);
    ConservationLog log{provenance_header(config, "simulate") + kConservationColumns, 0.0};
    log.record(state, config.integrator());
    return drive_simulation(config, options, state, generator, log);
}

CommandReport run_resume(const RunConfig& config, const CommandOptions& options) {
    if (options.checkpoint_path.empty()) throw UsageError("resume needs a checkpoint path");
    auto ckpt = read_checkpoint(options.checkpoint_path);
    if (ckpt.state.size() != config.lattice().size())
        throw UsageError("checkpoint lattice size does not match the config");
    const auto log_path = output_path(config, kConservationFile);
    auto log = truncate_log(read_text_file(log_path), provenance_header(config, "simulate"),
                            ckpt.state.step_count);
    return drive_simulation(config, options, ckpt.state, ckpt.generator, log);
}

CommandReport run_correlator(const RunConfig& config, const CommandOptions& options) {
    const auto lattice = config.lattice();
    const auto shell = config.mass_shell();
    const auto points = config.grid.points();
    CorrelatorAccumulator acc(lattice, shell, points, config.resolved_batch_length());
    const FieldSink sink = [&](std::span<const double> phi) { acc.push(phi); };
    sample(config, std::span(&sink, 1));

    CommandReport report;
    const auto header = provenance_header(config, "correlator");
    const auto mc = acc.result();
    std::ostringstream mc_csv;
    mc_csv << header;
    write_correlator_csv(mc, mc_csv);
    emit(report, config, "correlator_mc.csv", mc_csv.str());
    report.lines.push_back(fmt::format("samples {}", acc.count()));

    if (!shell.is_fixed()) {
        bool finite = true;
        for (const auto& v : mc.values) finite = finite && std::isfinite(std::abs(v));
        report.lines.push_back(fmt::format("no oracle for {} shell; values finite: {}",
                                           to_string(shell.kind), verdict(finite)));
        if (options.check) report.passed = finite;
        return report;
    }
    const auto oracle = expected_correlator_grid(config.kind, lattice, shell, config.beta, points);
    std::ostringstream oracle_csv;
    oracle_csv << header;
    write_correlator_csv(oracle, oracle_csv);
    emit(report, config, "correlator_oracle.csv", oracle_csv.str());

    const auto scores = grid_scores(mc, oracle);
    std::string score_csv = header + "y0,y1,y2,y3,score\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& y = points[i];
        score_csv += fmt::format("{},{},{},{},{}\n", csv_real(y[0]), csv_real(y[1]),
                                 csv_real(y[2]), csv_real(y[3]), csv_real(scores[i]));
        worst = std::max(worst, scores[i]);
    }
    emit(report, config, "correlator_scores.csv", score_csv);
    const double frac = fraction_within(scores, kAgreementSigmas);
    report.lines.push_back(fmt::format("points within {:g} stderr: {:.4f}", kAgreementSigmas, frac));
    report.lines.push_back(fmt::format("largest deviation {:.3f} stderr", worst));
    if (options.check) {
        report.passed = frac >= kAgreementFraction;
        report.lines.push_back(fmt::format("agreement >= {:g}: {}", kAgreementFraction,
                                           verdict(report.passed)));
    }
    return report;
}

CommandReport run_covariance(const RunConfig& config, const CommandOptions& options) {
    const auto lattice = config.lattice();
    const std::size_t n = lattice.size();
    const std::size_t b = config.resolved_batch_length();
    ModeCovarianceAccumulator block(spread_sites(n, std::min(config.covariance_sites, n)), b);
    ModeVarianceAccumulator modes(n, b);
    const std::vector<FieldSink> sinks{[&](std::span<const double> phi) { block.push(phi); },
                                       [&](std::span<const double> phi) { modes.push(phi); }};
    sample(config, sinks);

    const auto oracle = exact_covariance(config.kind, n, config.beta);
    const auto header = provenance_header(config, "covariance");
    CommandReport report;

    std::vector<double> block_scores;
    emit(report, config, "covariance.csv",
         header + covariance_block_csv(block.result(), oracle, block_scores));

    const auto var = modes.result();
    std::vector<double> mode_scores(n);
    std::string mode_csv = header + "site,variance,stderr,oracle,score\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = var.value[i] - oracle.diagonal;
        const double se = var.stderr_value[i];
        mode_scores[i] = diff == 0.0 ? 0.0 : (se > 0.0 ? std::abs(diff) / se : INFINITY);
        mode_csv += fmt::format("{},{},{},{},{}\n", i, csv_real(var.value[i]), csv_real(se),
                                csv_real(oracle.diagonal), csv_real(mode_scores[i]));
    }
    emit(report, config, "mode_variance.csv", mode_csv);

    const double f_modes = fraction_within(mode_scores, kAgreementSigmas);
    const double f_block = fraction_within(block_scores, kAgreementSigmas);
    report.lines.push_back(fmt::format("mode variances within {:g} stderr: {:.4f}",
                                       kAgreementSigmas, f_modes));
    report.lines.push_back(fmt::format("block entries within {:g} stderr: {:.4f}",
                                       kAgreementSigmas, f_block));
    if (options.check) {
        report.passed = f_modes >= kAgreementFraction && f_block >= kAgreementFraction;
        report.lines.push_back(fmt::format("agreement >= {:g}: {}", kAgreementFraction,
                                           verdict(report.passed)));
    }
    return report;
}

CommandReport run_mgf_check(const RunConfig& config, const CommandOptions&) {
    const auto lattice = config.lattice();
    const std::size_t n = lattice.size();
    const std::size_t b = config.resolved_batch_length();
    const auto sites = spread_sites(n, std::min(n, config.mgf_pairs + 1));

    std::vector<MgfProbe> probes;
    for (std::size_t k = 0; k < config.mgf_pairs; ++k) {
        const std::size_t p = k == 0 ? sites[0] : sites[(k - 1) % sites.size()];
        const std::size_t q = sites[k % sites.size()];
        probes.emplace_back(p, q, config.mgf_epsilon, b);
    }
    ModeCovarianceAccumulator cov(sites, b);
    const std::vector<FieldSink> sinks{[&](std::span<const double> phi) {
                                           for (auto& probe : probes) probe.push(phi);
                                       },
                                       [&](std::span<const double> phi) { cov.push(phi); }};
    sample(config, sinks);

    const auto direct = cov.result();
    auto position = [&](std::size_t site) {
        return static_cast<Eigen::Index>(std::find(sites.begin(), sites.end(), site) - sites.begin());
    };
    CommandReport report;
    std::string csv = provenance_header(config, "mgf-check") +
                      "p,q,mgf,mgf_stderr,covariance,covariance_stderr,score,passed\n";
    for (const auto& probe : probes) {
        const auto est = probe.estimate();
        const auto i = position(probe.p()), j = position(probe.q());
        const double c = direct.value(i, j);
        const double se_c = direct.stderr_value(i, j);
        const double se_m = est.stderr_value.value_or(NAN);
        const double se = std::hypot(se_m, se_c);
        const double diff = est.mean - c;
        const double z = diff == 0.0 ? 0.0 : (se > 0.0 ? std::abs(diff) / se : INFINITY);
        const bool ok = z <= kAgreementSigmas;
        report.passed = report.passed && ok;
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", probe.p(), probe.q(), csv_real(est.mean),
                           csv_real(se_m), csv_real(c), csv_real(se_c), csv_real(z), ok ? 1 : 0);
        report.lines.push_back(fmt::format("pair ({}, {}): mgf {:.6f} covariance {:.6f} score {:.3f} {}",
                                           probe.p(), probe.q(), est.mean, c, z, verdict(ok)));
    }
    emit(report, config, "mgf_check.csv", csv);
    return report;
}

CommandReport run_fock_check(const RunConfig& config, const CommandOptions&) {
    const auto lattice = config.lattice();
    const auto covariance = exact_covariance(config.kind, lattice.size(), config.beta);
    const auto space = OneParticleSpace::from_oracle(fock_observables(config, lattice, covariance), covariance);
    const FockRep rep(space.dimension(), config.fock_n_max);
    const auto results = run_fock_checks(space, rep, config.seed);

    const auto header = provenance_header(config, "fock-check");
    CommandReport report;
    std::string csv = header + "check,deviation,tolerance,passed\n";
    for (const auto& r : results) {
        report.passed = report.passed && r.passed();
        csv += fmt::format("{},{},{},{}\n", r.name, csv_real(r.deviation), csv_real(r.tolerance),
                           r.passed() ? 1 : 0);
        report.lines.push_back(fmt::format("{:<20} {:.3e} <= {:.1e} {}", r.name, r.deviation,
                                           r.tolerance, verdict(r.passed())));
    }
    emit(report, config, "fock_check.csv", csv);

    const auto& g = space.gram().value;
    std::string gram_csv = header + "i,j,re,im\n";
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            gram_csv += fmt::format("{},{},{},{}\n", i, j, csv_real(g(i, j).real()),
                                    csv_real(g(i, j).imag()));
    emit(report, config, "gram.csv", gram_csv);
    report.lines.push_back(fmt::format("one-particle dimension {}, Fock dimension {}",
                                       space.dimension(), rep.dimension()));
    return report;
}

CommandReport run_microcausality(const RunConfig& config, const CommandOptions& options) {
    const auto lattice = config.lattice();
    const auto [spacelike, timelike] = packet_pairs(config);
    MicrocausalityResult result;
    std::optional<MicrocausalityResult> oracle;
    if (options.source == "oracle") {
        const auto covariance = exact_covariance(config.kind, lattice.size(), config.beta);
        result = microcausality_ratio(spacelike, timelike, lattice, config.mass, covariance);
        if (config.kind == MatterKind::Free)
            oracle = microcausality_oracle(spacelike, timelike, lattice, config.mass, config.beta);
    } else if (options.source == "mc") {
        GramAccumulator acc(packet_observables(spacelike, timelike, lattice, config.mass),
                            config.resolved_batch_length());
        const FieldSink sink = [&](std::span<const double> phi) { acc.push(phi); };
        sample(config, std::span(&sink, 1));
        result = microcausality_ratio(acc);
    } else {
        throw UsageError("source must be oracle or mc");
    }

    CommandReport report;
    std::string csv = provenance_header(config, "microcausality") +
                      "source,k_spacelike,k_timelike,ratio,ratio_stderr\n";
    csv += fmt::format("{},{},{},{},{}\n", options.source == "mc" ? "mc" : "exact",
                       csv_real(result.k_spacelike), csv_real(result.k_timelike),
                       csv_real(result.ratio), csv_real(result.ratio_stderr.value_or(NAN)));
    report.passed = result.ratio <= kMicrocausalityBound;
    report.lines.push_back(fmt::format("ratio {:.3e} <= {:g}: {}", result.ratio,
                                       kMicrocausalityBound, verdict(report.passed)));
    if (oracle) {
        csv += fmt::format("pauli_jordan,{},{},{},nan\n", csv_real(oracle->k_spacelike),
                           csv_real(oracle->k_timelike), csv_real(oracle->ratio));
        const double gap = std::abs(result.ratio - oracle->ratio);
        const bool ok = gap <= kOracleMatchTolerance;
        report.passed = report.passed && ok;
        report.lines.push_back(fmt::format("oracle ratio {:.3e}, gap {:.3e} <= {:g}: {}",
                                           oracle->ratio, gap, kOracleMatchTolerance, verdict(ok)));
    }
    emit(report, config, "microcausality.csv", csv);
    return report;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate",  "resume",     "correlator",
                                                "covariance", "mgf-check", "fock-check",
                                                "microcausality"};
    return names;
}

CommandReport run_command(std::string_view name, const RunConfig& config,
                          const CommandOptions& options) {
    if (name == "simulate") return run_simulate(config, options);
    if (name == "resume") return run_resume(config, options);
    if (name == "correlator") return run_correlator(config, options);
    if (name == "covariance") return run_covariance(config, options);
    if (name == "mgf-check") return run_mgf_check(config, options);
    if (name == "fock-check") return run_fock_check(config, options);
    if (name == "microcausality") return run_microcausality(config, options);
    throw UsageError("unknown command '" + std::string(name) + "'");
}

} // namespace rsft
