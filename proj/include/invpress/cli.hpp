#pragma once

#include "invpress/io.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace invpress {

constexpr const char* kReportSchema = "1";

/// Runs one command from its full parameter object (as embedded in reports)
/// and returns the report {"schema", "command", "parameters", "results", "warnings"}.
Json run_command(const Json& params);

/// Point cloud or table for --output csv.
std::string report_csv(const Json& report);

/// Full command line: report on `out`, diagnostics and error objects on `err`.
/// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace invpress
