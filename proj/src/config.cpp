#include "rsft/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "rsft/error.hpp"

namespace rsft {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view text, T& out) {
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::string real_text(double x) { return fmt::format("{:.17g}", x); }

struct Context {
    std::size_t line;
    std::string key;

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(line, key, message); }
};

double as_real(std::string_view v, const Context& ctx) {
    double x = 0.0;
    if (!parse_number(v, x)) ctx.fail("expected a real number, got '" + std::string(v) + "'");
    return x;
}

std::uint64_t as_count(std::string_view v, const Context& ctx) {
    std::uint64_t x = 0;
    if (!parse_number(v, x))
        ctx.fail("expected a nonnegative integer, got '" + std::string(v) + "'");
    return x;
}

int as_int(std::string_view v, const Context& ctx) {
    int x = 0;
    if (!parse_number(v, x)) ctx.fail("expected an integer, got '" + std::string(v) + "'");
    return x;
}

MatterKind as_matter(std::string_view v, const Context& ctx) {
    if (v == "free") return MatterKind::Free;
    if (v == "free_collective") return MatterKind::FreeCollective;
    ctx.fail("action.kind must be free or free_collective");
}

MassShell::Kind as_shell(std::string_view v, const Context& ctx) {
    if (v == "fixed") return MassShell::Kind::Fixed;
    if (v == "global_dynamic") return MassShell::Kind::GlobalDynamic;
    if (v == "local_dynamic") return MassShell::Kind::LocalDynamic;
    ctx.fail("shell.kind must be fixed, global_dynamic or local_dynamic");
}

using Setter = std::function<void(RunConfig&, std::string_view, const Context&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table{
        {"lattice.n_per_axis", [](RunConfig& c, auto v, auto& x) { c.n_per_axis = as_int(v, x); }},
        {"lattice.spacing", [](RunConfig& c, auto v, auto& x) { c.spacing = as_real(v, x); }},
        {"physics.beta", [](RunConfig& c, auto v, auto& x) { c.beta = as_real(v, x); }},
        {"physics.mass", [](RunConfig& c, auto v, auto& x) { c.mass = as_real(v, x); }},
        {"physics.m_s",
         [](RunConfig& c, auto v, auto& x) {
             if (v == "N") c.m_s.reset();
             else c.m_s = as_real(v, x);
         }},
        {"action.kind", [](RunConfig& c, auto v, auto& x) { c.kind = as_matter(v, x); }},
        {"shell.kind", [](RunConfig& c, auto v, auto& x) { c.shell = as_shell(v, x); }},
        {"dynamics.dlambda", [](RunConfig& c, auto v, auto& x) { c.dlambda = as_real(v, x); }},
        {"dynamics.equilibration_steps",
         [](RunConfig& c, auto v, auto& x) { c.equilibration_steps = as_count(v, x); }},
        {"dynamics.sampling_steps",
         [](RunConfig& c, auto v, auto& x) { c.sampling_steps = as_count(v, x); }},
        {"dynamics.thin_stride", [](RunConfig& c, auto v, auto& x) { c.thin_stride = as_count(v, x); }},
        {"seed", [](RunConfig& c, auto v, auto& x) { c.seed = as_count(v, x); }},
        {"grid.t_extent", [](RunConfig& c, auto v, auto& x) { c.grid.t_extent = as_real(v, x); }},
        {"grid.t_points", [](RunConfig& c, auto v, auto& x) { c.grid.t_points = as_count(v, x); }},
        {"grid.x_extent", [](RunConfig& c, auto v, auto& x) { c.grid.x_extent = as_real(v, x); }},
        {"grid.x_points", [](RunConfig& c, auto v, auto& x) { c.grid.x_points = as_count(v, x); }},
        {"output.dir", [](RunConfig& c, auto v, auto&) { c.output_dir = std::string(v); }},
        {"checkpoint.interval",
         [](RunConfig& c, auto v, auto& x) { c.checkpoint_interval = as_count(v, x); }},
        {"log.interval", [](RunConfig& c, auto v, auto& x) { c.log_interval = as_count(v, x); }},
        {"estimator.batch_length",
         [](RunConfig& c, auto v, auto& x) { c.batch_length = as_count(v, x); }},
        {"covariance.sites",
         [](RunConfig& c, auto v, auto& x) { c.covariance_sites = as_count(v, x); }},
        {"mgf.epsilon", [](RunConfig& c, auto v, auto& x) { c.mgf_epsilon = as_real(v, x); }},
        {"mgf.pairs", [](RunConfig& c, auto v, auto& x) { c.mgf_pairs = as_count(v, x); }},
        {"fock.n_max", [](RunConfig& c, auto v, auto& x) { c.fock_n_max = as_int(v, x); }},
        {"fock.observables",
         [](RunConfig& c, auto v, auto& x) { c.fock_observables = as_count(v, x); }},
        {"packet.width", [](RunConfig& c, auto v, auto& x) { c.packet_width = as_real(v, x); }},
        {"packet.separation",
         [](RunConfig& c, auto v, auto& x) { c.packet_separation = as_real(v, x); }},
    };
    return table;
}

const std::vector<std::string>& required_keys() {
    static const std::vector<std::string> keys{
        "lattice.n_per_axis", "lattice.spacing",   "physics.beta",
        "physics.mass",       "action.kind",       "shell.kind",
        "dynamics.dlambda",   "dynamics.equilibration_steps",
        "dynamics.sampling_steps", "seed"};
    return keys;
}

std::optional<RunConfig> preset(std::string_view name) {
    RunConfig c;
    c.n_per_axis = 25;
    c.spacing = 0.1;
    c.beta = 1.0;
    c.mass = 1.0;
    c.dlambda = 0.01;
    c.equilibration_steps = 1000000;
    c.sampling_steps = 1000000;
    c.thin_stride = 10;
    c.seed = 1;
    c.preset = std::string(name);
    if (name == "example1") return c;
    if (name == "example2") {
        c.kind = MatterKind::FreeCollective;
        return c;
    }
    if (name == "example3") {
        c.shell = MassShell::Kind::GlobalDynamic;
        return c;
    }
    if (name == "example4") {
        c.shell = MassShell::Kind::LocalDynamic;
        return c;
    }
    if (name == "desk") {
        c.kind = MatterKind::FreeCollective;
        c.n_per_axis = 9;
        c.equilibration_steps = 100000;
        c.sampling_steps = 400000;
        return c;
    }
    return std::nullopt;
}

struct Line {
    std::size_t number;
    std::string key;
    std::string value;
};

} // namespace

bool is_preset(std::string_view name) { return preset(name).has_value(); }

BathParams RunConfig::bath() const {
    const auto n = static_cast<std::size_t>(n_per_axis) * n_per_axis * n_per_axis;
    return {beta, m_s.value_or(static_cast<double>(n)), n};
}

IntegratorParams RunConfig::integrator() const { return {dlambda, bath(), kind}; }

MassShell RunConfig::mass_shell() const {
    switch (shell) {
    case MassShell::Kind::Fixed: return MassShell::fixed(mass);
    case MassShell::Kind::GlobalDynamic: return MassShell::global_dynamic();
    case MassShell::Kind::LocalDynamic: return MassShell::local_dynamic();
    }
    return MassShell::fixed(mass);
}

SamplingPlan RunConfig::plan() const { return {equilibration_steps, sampling_steps, thin_stride}; }

std::size_t RunConfig::resolved_batch_length() const {
    return batch_length != 0 ? batch_length : default_batch_length(plan().sample_count());
}

void RunConfig::validate() const {
    auto fail = [](const char* key, const std::string& message) {
        throw ParseError(0, key, message);
    };
    if (n_per_axis < 1) fail("lattice.n_per_axis", "n_per_axis must be at least 1");
    if (!(spacing > 0.0)) fail("lattice.spacing", "spacing must be positive");
    if (!(beta > 0.0)) fail("physics.beta", "beta must be positive");
    if (!(mass >= 0.0)) fail("physics.mass", "mass must be nonnegative");
    if (m_s && !(*m_s > 0.0)) fail("physics.m_s", "m_s must be positive");
    if (!(dlambda > 0.0)) fail("dynamics.dlambda", "dlambda must be positive");
    if (thin_stride == 0) fail("dynamics.thin_stride", "thin_stride must be positive");
    if (grid.t_points == 0 || grid.x_points == 0) fail("grid.t_points", "grid needs points");
    if (!(grid.t_extent >= 0.0) || !(grid.x_extent >= 0.0))
        fail("grid.t_extent", "grid extents must be nonnegative");
    if (log_interval == 0) fail("log.interval", "log interval must be positive");
    if (covariance_sites == 0 || covariance_sites > ModeCovarianceAccumulator::kMaxSites)
        fail("covariance.sites", "covariance.sites must be in [1, 64]");
    if (!(mgf_epsilon > 0.0)) fail("mgf.epsilon", "epsilon must be positive");
    if (mgf_pairs == 0) fail("mgf.pairs", "mgf.pairs must be positive");
    if (fock_n_max < 1) fail("fock.n_max", "n_max must be at least 1");
    if (fock_observables == 0) fail("fock.observables", "need at least one observable");
    if (!(packet_width > 0.0)) fail("packet.width", "packet width must be positive");
    if (!(packet_separation > 0.0)) fail("packet.separation", "separation must be positive");
}

RunConfig parse_config(std::string_view text) {
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++number;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (raw.empty()) continue;
        const auto eq = raw.find('=');
        if (eq == std::string_view::npos) throw ParseError(number, "", "expected 'key = value'");
        const auto key = trim(raw.substr(0, eq));
        const auto value = trim(raw.substr(eq + 1));
        if (key.empty()) throw ParseError(number, "", "empty key");
        if (value.empty()) throw ParseError(number, std::string(key), "empty value");
        lines.push_back({number, std::string(key), std::string(value)});
    }

    RunConfig config;
    std::set<std::string> seen;
    bool have_preset = false;
    for (const auto& l : lines) {
        if (l.key != "preset") continue;
        if (have_preset) throw ParseError(l.number, l.key, "preset given twice");
        auto p = preset(l.value);
        if (!p) throw ParseError(l.number, l.key, "unknown preset '" + l.value + "'");
        config = *p;
        have_preset = true;
    }
    for (const auto& l : lines) {
        if (l.key == "preset") continue;
        const auto it = setters().find(l.key);
        if (it == setters().end()) throw ParseError(l.number, l.key, "unknown key");
        if (!seen.insert(l.key).second) throw ParseError(l.number, l.key, "key given twice");
        it->second(config, l.value, Context{l.number, l.key});
    }
    if (!have_preset) {
        std::string missing;
        for (const auto& k : required_keys())
            if (!seen.count(k)) missing += (missing.empty() ? "" : ", ") + k;
        if (!missing.empty()) throw ParseError(0, "", "missing required keys: " + missing);
    }
    try {
        config.validate();
    } catch (const ParseError& e) {
        for (const auto& l : lines)
            if (l.key == e.key()) {
                const std::string message = e.what();
                throw ParseError(l.number, l.key, message);
            }
        throw;
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string RunConfig::to_text() const {
    std::string out;
    auto put = [&](const char* key, const std::string& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    if (!preset.empty()) put("preset", preset);
    put("lattice.n_per_axis", std::to_string(n_per_axis));
    put("lattice.spacing", real_text(spacing));
    put("physics.beta", real_text(beta));
    put("physics.mass", real_text(mass));
    put("physics.m_s", m_s ? real_text(*m_s) : "N");
    put("action.kind", to_string(kind));
    put("shell.kind", to_string(shell));
    put("dynamics.dlambda", real_text(dlambda));
    put("dynamics.equilibration_steps", std::to_string(equilibration_steps));
    put("dynamics.sampling_steps", std::to_string(sampling_steps));
    put("dynamics.thin_stride", std::to_string(thin_stride));
    put("seed", std::to_string(seed));
    put("grid.t_extent", real_text(grid.t_extent));
    put("grid.t_points", std::to_string(grid.t_points));
    put("grid.x_extent", real_text(grid.x_extent));
    put("grid.x_points", std::to_string(grid.x_points));
    put("output.dir", output_dir);
    put("checkpoint.interval", std::to_string(checkpoint_interval));
    put("log.interval", std::to_string(log_interval));
    put("estimator.batch_length", std::to_string(batch_length));
    put("covariance.sites", std::to_string(covariance_sites));
    put("mgf.epsilon", real_text(mgf_epsilon));
    put("mgf.pairs", std::to_string(mgf_pairs));
    put("fock.n_max", std::to_string(fock_n_max));
    put("fock.observables", std::to_string(fock_observables));
    put("packet.width", real_text(packet_width));
    put("packet.separation", real_text(packet_separation));
    return out;
}

} // namespace rsft
