#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rsft/commands.hpp"
#include "rsft/config.hpp"
#include "rsft/error.hpp"

namespace {

void print_error(const std::string& kind, const std::string& message,
                 const rsft::ParseError* parse = nullptr) {
    nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
    if (parse) {
        j["error"]["line"] = parse->line();
        j["error"]["key"] = parse->key();
    }
    std::fputs((j.dump() + "\n").c_str(), stderr);
}

const char* describe(const std::string& name) {
    if (name == "simulate") return "integrate the flow and log the conserved action";
    if (name == "resume") return "continue a simulate run from its checkpoint";
    if (name == "correlator") return "sample the two-point correlator on the (y0, y1) plane";
    if (name == "covariance") return "sample per-site variances and a site covariance block";
    if (name == "mgf-check") return "compare generating-function derivatives with the covariance";
    if (name == "fock-check") return "build the truncated Fock representation and check its algebra";
    if (name == "microcausality") return "commutator of spacelike packets relative to timelike ones";
    return "";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic field simulation and operator checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    rsft::CommandOptions options;
    std::uint64_t stop_after = 0;

    for (const auto& name : rsft::command_names()) {
        auto* sub = app.add_subcommand(name, describe(name));
        sub->add_option("-c,--config", config_path, "config file")->required();
        sub->add_option("-o,--output", output_dir, "override output.dir");
        sub->add_option("--seed", seed, "override seed");
        if (name == "simulate" || name == "correlator" || name == "covariance" || name == "resume")
            sub->add_flag("--check", options.check, "gate the exit status on the comparison");
        if (name == "simulate" || name == "resume")
            sub->add_option("--stop-after", stop_after, "stop after this many total steps");
        if (name == "resume")
            sub->add_option("--checkpoint", options.checkpoint_path, "checkpoint file")->required();
        if (name == "microcausality")
            sub->add_option("--source", options.source, "oracle or mc")
                ->check(CLI::IsMember({"oracle", "mc"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("usage", e.what());
        return 2;
    }

    try {
        auto config = rsft::load_config(config_path);
        if (!output_dir.empty()) config.output_dir = output_dir;
        if (seed) config.seed = *seed;
        if (stop_after != 0) options.stop_after = stop_after;

        const std::string name = app.get_subcommands().front()->get_name();
        const auto report = rsft::run_command(name, config, options);
        for (const auto& line : report.lines) fmt::print("{}\n", line);
        for (const auto& file : report.files) fmt::print("wrote {}\n", file);
        return report.passed ? 0 : 1;
    } catch (const rsft::StepFailure& e) {
        nlohmann::json j{{"error", {{"kind", e.kind()}, {"message", e.what()},
                                    {"stage", rsft::to_string(e.stage())}}}};
        if (e.step()) j["error"]["step"] = *e.step();
        std::fputs((j.dump() + "\n").c_str(), stderr);
        return 2;
    } catch (const rsft::ParseError& e) {
        print_error(e.kind(), e.what(), &e);
        return 2;
    } catch (const rsft::Error& e) {
        print_error(e.kind(), e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 2;
    }
}
