#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "multitime_cli/config.hpp"

namespace multitime::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Numeric constants the core uses implicitly, echoed in every report.
json settings_json();

/// Runs one loaded configuration and assembles the report (without the
/// duration field). `csv_path` is recorded in the report header when set.
json build_report(Subcommand subcommand, const LoadedConfig& config, const Outcome& outcome,
                  const std::string& csv_path);

/// Worker count: MULTITIME_JOBS if set, else `flag` if non-zero, else the
/// number of hardware threads.
std::size_t resolve_jobs(std::size_t flag);

/// Full command-line entry point; returns the process exit code.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace multitime::cli
