#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include "qnc/schemes.hpp"
#include "qnc_cli/config.hpp"

namespace qnc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kVerifyFail = 3 };

struct CommandContext {
    // Written only to the CSV "# generated" line or the JSON "generated" key.
    std::string timestamp;
};

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

/// The model, readout and rotation for the configured scheme (not "all").
/// Matching is checked against tolerances.matching when enforced.
SchemeSetup build_setup(const RunConfig& config, SchemeKind kind);

int cmd_model(const RunConfig& config, std::ostream& out, const CommandContext& ctx);
int cmd_sweep(const RunConfig& config, std::ostream& out, const CommandContext& ctx);
int cmd_budget(const RunConfig& config, std::ostream& out, const CommandContext& ctx);
/// Returns kVerifyFail when any claimed cancellation misses its tolerance.
int cmd_verify(const RunConfig& config, std::ostream& out, const CommandContext& ctx);
int cmd_feasibility(const RunConfig& config, std::ostream& out, const CommandContext& ctx);
int cmd_graph(const RunConfig& config, std::ostream& out, const CommandContext& ctx);

/// Dispatches by name and maps exceptions to exit codes, printing the
/// message to `err`: configuration and label problems give kUsage, numerical
/// failures kNumerical.
int run_command(std::string_view name, const RunConfig& config, std::ostream& out,
                std::ostream& err, const CommandContext& ctx);

}  // namespace qnc::cli
