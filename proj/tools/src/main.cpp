#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnc_cli/commands.hpp"
#include "qnc_cli/config.hpp"

namespace {

struct Flags {
    std::string config;
    std::string preset;
    std::string format;
    std::string out;
    std::string grid;
    std::string scheme;
    std::string source;
    std::string sink;
    std::vector<std::string> tolerances;
    std::optional<double> squeeze;
    std::optional<unsigned> threads;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--preset", f.preset, "Parameter preset")
        ->check(CLI::IsMember({"gw", "micro", "normalized"}));
    cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", f.out, "Output file (default: stdout)");
    cmd->add_option("--grid", f.grid, "Frequency grid min:max:count:log|lin");
    cmd->add_option("--scheme", f.scheme, "Scheme name, or 'all' for verify");
    cmd->add_option("--tolerance", f.tolerances, "Tolerance override name=value (repeatable)");
    cmd->add_option("--squeeze", f.squeeze, "Squeezing parameter r of the phase source");
    cmd->add_option("--threads", f.threads, "Sweep worker threads");
    cmd->add_option("--source", f.source, "Graph path source label");
    cmd->add_option("--sink", f.sink, "Graph path sink label");
}

qnc::cli::RunConfig resolve(const Flags& f) {
    using namespace qnc::cli;
    RunConfig c = preset(f.preset.empty() ? "normalized" : f.preset);
    if (!f.config.empty()) c = load_config(f.config, c);
    if (!f.format.empty()) c.output.format = f.format == "csv" ? Format::csv : Format::json;
    if (!f.out.empty()) c.output.path = f.out;
    if (!f.grid.empty()) c.grid = parse_grid(f.grid, c.grid);
    if (!f.scheme.empty()) c.scheme.kind = f.scheme;
    if (!f.source.empty()) c.graph.source = f.source;
    if (!f.sink.empty()) c.graph.sink = f.sink;
    for (const auto& t : f.tolerances) c.tolerances.apply_override(t);
    if (f.squeeze) c.noise.squeeze_r = *f.squeeze;
    if (f.threads) c.threads = *f.threads;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum noise cancellation toolkit"};
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"model", "Print the state-space model and its realizability residual"},
        {"sweep", "Transfer matrix over the frequency grid"},
        {"budget", "Force-referred noise budget against the SQL"},
        {"verify", "Check each scheme's cancellation claims"},
        {"feasibility", "OPA gain and auxiliary photon estimates"},
        {"graph", "Signal-flow graph, path listing and cancellation certificate"},
    };
    for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? qnc::cli::kOk : qnc::cli::kUsage;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    qnc::cli::RunConfig config;
    try {
        config = resolve(flags);
    } catch (const qnc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qnc::cli::kUsage;
    }

    const qnc::cli::CommandContext ctx{qnc::cli::utc_timestamp()};
    if (config.output.path.empty()) return qnc::cli::run_command(name, config, std::cout, std::cerr, ctx);
    std::ofstream out(config.output.path);
    if (!out) {
        std::cerr << "error: cannot write " << config.output.path << "\n";
        return qnc::cli::kUsage;
    }
    return qnc::cli::run_command(name, config, out, std::cerr, ctx);
}
