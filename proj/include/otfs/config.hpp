// Run configuration: human-readable key-value config files with per-subframe
// sections and unit suffixes, built-in presets, and layout construction.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "otfs/dd.hpp"
#include "otfs/frames.hpp"

namespace otfs::cfg {

// Parse failure with position diagnostics (line is 1-based; field names the
// offending key when known).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string field, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) +
                             (field.empty() ? "" : ", field '" + field + "'") + ": " + what),
          line_(line),
          field_(std::move(field)) {}
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

struct SubframeSpec {
    int subcarriers = 0;
    int slots = 0;
    double spacing_hz = 0.0;
    std::optional<double> pilot_amp;  // default: sqrt(max(1, data cells))
};

struct RunConfig {
    int type = 1;       // detection type 1|2|3
    int tap_case = 1;   // 1 integer, 2 fractional Doppler, 3 fractional both
    std::vector<double> snr_db;
    long long trials = 1000;
    std::uint64_t seed = 1;
    std::string out_path = "sweep.csv";
    double carrier_hz = 24.0e9;
    std::vector<SubframeSpec> subframes;
    int guard_doppler = 0;  // type-2 guard sizing (max in-range |Doppler| tap)
    int guard_delay = 0;    // type-3 guard sizing (max in-range delay tap)
    // Published reference figure for the proposed max range, when the config
    // mirrors a benchmark parameter set whose printed value disagrees with
    // the formula; reports annotate, never reconcile.
    std::optional<double> reference_max_range_km;
};

// Parse config text; throws ConfigError with line/field diagnostics.
RunConfig parse_config(const std::string& text);

// Load and parse a config file; file-system problems surface as ConfigError
// on line 0.
RunConfig load_config_file(const std::string& path);

// Serialize so that parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& c);

// Built-in parameter sets: "desk" (small co-prime grids for fast exact-case
// study) and "table3" (the 24 GHz / 7.68 MHz benchmark set), each for
// detection types 1-3. Throws std::invalid_argument on unknown names/types.
RunConfig preset(const std::string& name, int type);

struct BuiltLayout {
    frames::FrameLayout layout;
    dd::SubframeConfig whole;  // classic-baseline grid over the same resources
};

// Materialize the layout (center pilots, default pilot amplitude, masks) and
// its whole-frame counterpart. Layout rule violations propagate as the
// frames module's validation errors.
BuiltLayout build_layout(const RunConfig& c);

}  // namespace otfs::cfg
