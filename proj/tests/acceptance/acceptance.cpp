// Desk-scale acceptance runs. Prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rsft/commands.hpp"
#include "rsft/config.hpp"
#include "rsft/csv_output.hpp"
#include "rsft/dynamics.hpp"
#include "rsft/error.hpp"

using namespace rsft;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

fs::path g_workdir;

fs::path fresh_dir(const std::string& name) {
    const auto dir = g_workdir / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        if (!out.empty()) out += "; ";
        for (char ch : l)
            if (ch != ' ' || out.empty() || out.back() != ' ') out += ch;
    }
    return out;
}

// n = 7 free_collective system of the conservation and reversibility runs.
RunConfig small_system(double dlambda, std::uint64_t steps) {
    return parse_config(fmt::format(R"(lattice.n_per_axis = 7
lattice.spacing = 0.1
physics.beta = 1
physics.mass = 1
physics.m_s = N
action.kind = free_collective
shell.kind = fixed
dynamics.dlambda = {}
dynamics.equilibration_steps = 0
dynamics.sampling_steps = {}
seed = 1
log.interval = 100
checkpoint.interval = 20000
)",
                                     dlambda, steps));
}

RunConfig desk(const std::string& overrides, const fs::path& dir) {
    auto c = parse_config("preset = desk\n" + overrides);
    c.output_dir = dir.string();
    return c;
}

double max_abs_action(const RunConfig& c) {
    auto state = init_state(c.lattice(), c.bath(), c.kind, c.seed);
    const auto params = c.integrator();
    double worst = 0.0;
    const Observer track = [&](const ExtendedState& s) {
        worst = std::max(worst, std::abs(total_action(s, params.kind, params.bath)));
    };
    run_in_place(state, params, c.plan().total_steps(), std::span(&track, 1));
    return worst;
}

// Last column of every data row of a CSV with a comment header.
std::vector<double> last_column(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<double> out;
    bool header = true;
    for (std::string row; std::getline(in, row);) {
        if (row.starts_with("#")) continue;
        if (header) {
            header = false;
            continue;
        }
        out.push_back(std::stod(row.substr(row.rfind(',') + 1)));
    }
    return out;
}

bool same_files(const fs::path& a, const fs::path& b, const std::vector<std::string>& names) {
    for (const auto& n : names)
        if (read_text_file((a / n).string()) != read_text_file((b / n).string())) return false;
    return true;
}

Outcome conservation() {
    const double coarse = max_abs_action(small_system(0.01, 100000));
    const double fine = max_abs_action(small_system(0.005, 200000));
    const double ratio = coarse / fine;
    const bool bound = coarse <= kConservationTolerance;
    const bool scaling = ratio >= 3.0 && ratio <= 5.0;
    return {bound && scaling,
            fmt::format("max |S| {:.3e} at dlambda 0.01 (bound {:g}: {}), {:.3e} at 0.005, ratio "
                        "{:.3f} (in [3, 5]: {})",
                        coarse, kConservationTolerance, bound ? "pass" : "fail", fine, ratio,
                        scaling ? "pass" : "fail")};
}

Outcome reversibility() {
    const auto c = small_system(0.01, 10000);
    const auto params = c.integrator();
    const auto start = init_state(c.lattice(), c.bath(), c.kind, c.seed);
    auto s = run(start, params, 10000);
    for (auto& p : s.pi_phi) p = -p;
    s.pi_s = -s.pi_s;
    s = run(s, params, 10000);
    double err = std::abs(s.s - start.s);
    err = std::max(err, std::abs(s.pi_s + start.pi_s));
    for (std::size_t i = 0; i < s.size(); ++i) {
        err = std::max(err, std::abs(s.phi[i] - start.phi[i]));
        err = std::max(err, std::abs(s.pi_phi[i] + start.pi_phi[i]));
    }
    return {err <= 1e-6, fmt::format("max-norm error after 10^4 steps there and back {:.3e} (bound 1e-6)", err)};
}

Outcome ensemble() {
    CommandOptions opt;
    opt.check = true;
    const auto r = run_covariance(desk("", fresh_dir("covariance")), opt);
    return {r.passed, join(r.lines)};
}

Outcome mgf() {
    const auto r = run_mgf_check(desk("", fresh_dir("mgf")), {});
    return {r.passed, join(r.lines)};
}

Outcome correlator() {
    CommandOptions opt;
    opt.check = true;
    const auto collective = run_correlator(desk("", fresh_dir("correlator_collective")), opt);
    const auto free_dir = fresh_dir("correlator_free");
    run_correlator(desk("action.kind = free\n", free_dir), opt);
    const auto scores = last_column((free_dir / "correlator_scores.csv").string());
    const double worst = *std::max_element(scores.begin(), scores.end());
    const bool broken = worst > 10.0;
    return {collective.passed && broken,
            fmt::format("free_collective: {}; free: largest deviation {:.1f} stderr (> 10: {})",
                        join(collective.lines), worst, broken ? "pass" : "fail")};
}

Outcome fock() {
    const auto r = run_fock_check(desk("", fresh_dir("fock")), {});
    return {r.passed, join(r.lines)};
}

Outcome microcausality() {
    auto c = parse_config("preset = example1\n");
    c.output_dir = fresh_dir("microcausality").string();
    const auto r = run_microcausality(c, {});
    return {r.passed, join(r.lines)};
}

Outcome dynamic_shells() {
    bool ok = true;
    std::vector<std::string> parts;
    for (const char* shell : {"global_dynamic", "local_dynamic"}) {
        CommandOptions opt;
        opt.check = true;
        const std::string key = fmt::format("shell.kind = {}\n", shell);
        const auto a = fresh_dir(fmt::format("{}_a", shell));
        const auto b = fresh_dir(fmt::format("{}_b", shell));
        const auto first = run_correlator(desk(key, a), opt);
        run_correlator(desk(key, b), opt);
        const bool repeat = same_files(a, b, {"correlator_mc.csv"});
        const auto sim = run_simulate(desk(key, a), opt);
        ok = ok && first.passed && repeat && sim.passed;
        parts.push_back(fmt::format("{}: {}; rerun identical: {}; {}", shell, join(first.lines),
                                    repeat ? "pass" : "fail", join(sim.lines)));
    }
    return {ok, join(parts)};
}

Outcome reproducibility() {
    const auto cfg = [](const fs::path& dir) {
        auto c = small_system(0.01, 100000);
        c.output_dir = dir.string();
        return c;
    };
    const auto a = fresh_dir("repeat_a"), b = fresh_dir("repeat_b"), r = fresh_dir("resumed");
    run_simulate(cfg(a), {});
    run_simulate(cfg(b), {});
    const std::vector<std::string> sim_files{kConservationFile, kCheckpointFile};
    const bool repeat_sim = same_files(a, b, sim_files);

    CommandOptions stop;
    stop.stop_after = 43210;
    run_simulate(cfg(r), stop);
    CommandOptions resume;
    resume.checkpoint_path = (r / kCheckpointFile).string();
    run_resume(cfg(r), resume);
    const bool resumed = same_files(a, r, sim_files);

    run_mgf_check(desk("", a), {});
    run_mgf_check(desk("", b), {});
    const bool repeat_mgf = same_files(a, b, {"mgf_check.csv"});

    return {repeat_sim && resumed && repeat_mgf,
            fmt::format("repeated simulate identical: {}; resumed at step 43210 identical: {}; "
                        "repeated mgf-check identical: {}",
                        repeat_sim ? "pass" : "fail", resumed ? "pass" : "fail",
                        repeat_mgf ? "pass" : "fail")};
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
    static const std::map<int, std::pair<const char*, std::function<Outcome()>>> table{
        {1, {"action conservation", conservation}},
        {2, {"reversibility", reversibility}},
        {3, {"ensemble covariance", ensemble}},
        {4, {"mgf cross-check", mgf}},
        {5, {"correlator reconstruction", correlator}},
        {6, {"fock algebra", fock}},
        {7, {"microcausality", microcausality}},
        {8, {"dynamical shells", dynamic_shells}},
        {9, {"reproducibility", reproducibility}},
    };
    return table;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rsft acceptance runs"};
    std::vector<int> selected;
    std::string workdir = (fs::temp_directory_path() / "rsft_acceptance").string();
    app.add_option("-c,--criterion", selected, "criteria to run (default: all)")
        ->check(CLI::Range(1, 9));
    app.add_option("-w,--workdir", workdir, "scratch directory for outputs");
    CLI11_PARSE(app, argc, argv);
    if (selected.empty())
        for (const auto& [n, _] : criteria()) selected.push_back(n);

    int failures = 0;
    for (int n : selected) {
        g_workdir = fs::path(workdir) / fmt::format("criterion_{}", n);
        const auto& [name, body] = criteria().at(n);
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const Error& e) {
            o = {false, fmt::format("{} error: {}", e.kind(), e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fmt::print("{} criterion {} ({}): {} [{:.1f} s]\n", o.passed ? "PASS" : "FAIL", n, name,
                   o.detail, secs);
        std::fflush(stdout);
        failures += o.passed ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
