// Command implementations behind the command-line front end; exposed as
// library calls so the test suites can drive them directly.
#pragma once

#include <cstdint>
#include <string>

namespace contain::cli {

/// Simulates every named policy of the config; writes per-policy trajectory
/// and R-N curve files, a metrics summary and a config echo. Returns 0 on
/// success, 2 on config errors, 3 when the model fails its assumption check.
int run_command(const std::string& config_path, const std::string& out_dir_override = "");

/// Runs verification suites ("all", "P1".."P8", "L4", "A1A2" or "cp"); writes
/// one report file per suite and prints a summary line each. Nonzero exit iff
/// any suite records a failure.
int verify_command(const std::string& suite, int n_scenarios, std::uint64_t seed,
                   const std::string& out_dir, bool negative_control);

/// Exports the column data behind the three reference figures ("fig3",
/// "fig4", "fig5") for the configured model.
int figure_data_command(const std::string& figure_id, const std::string& config_path,
                        const std::string& out_dir);

}  // namespace contain::cli
