#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qnc/error.hpp"
#include "qnc/linsys.hpp"
#include "qnc/optomech.hpp"
#include "qnc/schemes.hpp"

namespace qnc::cli {

/// Malformed config text or an invalid field. `where()` is either
/// "line L, column C" or the dotted field path.
class ConfigError : public Error {
public:
    ConfigError(std::string where, const std::string& what)
        : Error("config " + where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

enum class Spacing { log, lin };
enum class GridUnits { omega_m, absolute };
enum class Format { csv, json };

struct GridSpec {
    double min = 1e-3;
    double max = 1e3;
    std::size_t count = 400;
    Spacing spacing = Spacing::log;
    // omega_m: min and max are multiples of the mechanical frequency.
    GridUnits units = GridUnits::omega_m;
    double pole_exclusion = FrequencyGrid::kDefaultPoleExclusion;

    FrequencyGrid build(const SensorParams& params) const;
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Parses "min:max:count:log|lin" (units stay as they were).
GridSpec parse_grid(std::string_view text, GridSpec base = {});

struct MatchingOverride {
    double mu = -1.0;
    double nu = 1.0;
    double g = 1.0;
    friend bool operator==(const MatchingOverride&, const MatchingOverride&) = default;
};

struct SchemeConfig {
    // A scheme name, or "all" (verify only).
    std::string kind = "baseline";
    double lowfreq_scale = 1.0;
    std::optional<MatchingOverride> matching;
    bool enforce_matching = true;
    friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

struct NoiseConfig {
    double squeeze_r = 0.0;
    double squeeze_angle = kPhaseQuadratureAngle;
    friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;

    static constexpr double kPhaseQuadratureAngle = 1.5707963267948966;
};

/// Empty labels select the scheme's amplitude input and measured output.
struct GraphConfig {
    std::string source;
    std::string sink;
    friend bool operator==(const GraphConfig&, const GraphConfig&) = default;
};

struct Tolerances {
    double cancellation = 1e-10;   // relative to max |K_pm| on the grid
    double rotation = 1e-12;       // pointwise, relative to |K_pm|
    double realizability = 1e-12;
    double matching = 1e-12;
    double certificate = 1e-12;
    double path = 1e-10;
    friend bool operator==(const Tolerances&, const Tolerances&) = default;

    /// "name=value"; throws ConfigError for unknown names or bad numbers.
    void apply_override(std::string_view assignment);
};

struct OutputConfig {
    std::optional<Format> format;  // unset: the command's default
    std::string path;              // empty: stdout
    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
    std::string preset = "normalized";
    SensorParams sensor = SensorParams::normalized();
    SchemeConfig scheme;
    NoiseConfig noise;
    GridSpec grid;
    GraphConfig graph;
    Tolerances tolerances;
    OutputConfig output;
    unsigned threads = 1;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    /// Validates every field; throws ConfigError naming the first bad one.
    void validate() const;
};

/// "gw", "micro" or "normalized".
RunConfig preset(std::string_view name);

/// JSON text of the config; parse_config(print_config(c)) == c.
std::string print_config(const RunConfig& config);

/// Fields missing from `text` keep the values of `base` (or of the preset
/// named in the text, when it names one). The sensor section may give
/// `alpha` directly or one of `kappa`, `power`, `input_amplitude`.
RunConfig parse_config(std::string_view text, const RunConfig& base = {});

RunConfig load_config(const std::string& path, const RunConfig& base = {});

}  // namespace qnc::cli
