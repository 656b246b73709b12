#include "rsft/csv_output.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rsft/error.hpp"

namespace rsft {

std::string csv_real(double x) {
    if (std::isnan(x)) return "nan";
    return fmt::format("{:.17g}", x);
}

std::string provenance_header(const RunConfig& config, std::string_view command) {
    std::string out = fmt::format("# rsft {}\n# generator {}\n", command, kGeneratorId);
    std::istringstream lines(config.to_text());
    for (std::string line; std::getline(lines, line);) {
        if (line.starts_with("output.dir")) continue; // location only, not content
        out += line.starts_with("# ") ? line + "\n" : "# " + line + "\n";
    }
    return out;
}

void write_correlator_csv(const CorrelatorGrid& grid, std::ostream& out) {
    if (grid.values.size() != grid.points.size() || grid.stderrs.size() != grid.points.size())
        throw UsageError("correlator grid arrays have different lengths");
    out << kCorrelatorColumns << '\n';
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const auto& y = grid.points[i];
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_real(y[0]), csv_real(y[1]),
                           csv_real(y[2]), csv_real(y[3]), csv_real(grid.values[i].real()),
                           csv_real(grid.values[i].imag()), csv_real(grid.stderrs[i][0]),
                           csv_real(grid.stderrs[i][1]), grid.source);
    }
}

void emit_correlator_csv(const CorrelatorGrid& grid, const std::string& path) {
    emit_correlator_csv(grid, path, "");
}

void emit_correlator_csv(const CorrelatorGrid& grid, const std::string& path,
                         const std::string& header) {
    std::ostringstream out;
    out << header;
    write_correlator_csv(grid, out);
    write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace rsft
