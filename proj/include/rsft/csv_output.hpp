#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include "rsft/config.hpp"
#include "rsft/estimators.hpp"

namespace rsft {

/// 17 significant digits; "nan" for NaN.
std::string csv_real(double x);

/// `# ` comment block with the command, the generator and the resolved config
/// (output.dir omitted so identical runs in different places match).
std::string provenance_header(const RunConfig& config, std::string_view command);

inline constexpr const char* kCorrelatorColumns =
    "y0,y1,y2,y3,re_mean,im_mean,re_stderr,im_stderr,source";

void write_correlator_csv(const CorrelatorGrid& grid, std::ostream& out);

/// Header line plus one row per point, nothing else.
void emit_correlator_csv(const CorrelatorGrid& grid, const std::string& path);

/// Same, preceded by a comment header.
void emit_correlator_csv(const CorrelatorGrid& grid, const std::string& path,
                         const std::string& header);

/// Writes `content` to `path` or throws IoError.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace rsft
