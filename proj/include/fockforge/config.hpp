#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fockforge/detection.hpp"
#include "fockforge/sfwm_source.hpp"
#include "fockforge/toml.hpp"

namespace fockforge {

enum class ExperimentKind {
    delay_scan,
    power_scan,
    hom,
    fringe1,
    fringe2,
    fringe4,
    tomo2,
    tomo4,
    tomo_fock,
    brightness,
    budget,
};

const std::vector<std::pair<ExperimentKind, std::string>>& experiment_kinds();
std::string kind_name(ExperimentKind kind);
std::optional<ExperimentKind> kind_from_name(const std::string& name);

// expected: exact expected counts (rounded to integers where counts are
// integers); poisson: one Poisson draw per data point, seeded.
enum class Statistics { expected, poisson };

// Carries every problem found in a config, one message per entry; what() joins
// them with newlines.
struct ConfigError : std::runtime_error {
    std::vector<std::string> issues;
    explicit ConfigError(std::vector<std::string> issues_);
};

struct ScanGrid {
    double start = 0.0;
    double stop = 1.0;
    int points = 2;

    std::vector<double> values() const;
};

struct NoiseConfig {
    double waveplate_angle_jitter_rad = 0.0; // sigma of per-setting angle error
    double distinguishability = 0.0;         // 0 = fully indistinguishable
    bool include_higher_order = false;       // keep photon numbers above target
};

struct DetectionConfig {
    int tree_h = 1;
    int tree_v = 1;
    double dark_count_hz = 0.0;
    double window_ns = 1.0;
};

struct PulseConfig {
    double input_fwhm_ps = 0.090;
    double input_bandwidth_nm = 80.0;
    double filter_bandwidth_nm = 0.4;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::budget;
    Statistics statistics = Statistics::poisson;
    std::uint64_t seed = 0;
    std::string output_dir = ".";

    PumpConfig pump;
    std::optional<double> squeeze_r; // direct override of the pump-derived r
    LossBudget loss;
    BrightnessReference reference;
    NoiseConfig noise;
    DetectionConfig detection;
    PulseConfig pulse;

    ScanGrid scan;

    double integration_s = 1.0; // per point, or per setting for tomography
    int resamples = 100;        // bootstrap resamples; 0 disables error bars

    double fringe_theta = 0.0;  // set per kind at load time
    ClickPattern fringe_pattern;

    double hom_rate_hz = 1000.0;
    double hom_envelope_fwhm_ps = 0.0; // 0 = follow pump.pulse_fwhm_ps

    double delay_background_hz = 100.0;
    double delay_peak_hz = 1000.0;

    // raw key -> source-style literal, echoed into reports
    std::map<std::string, std::string> echo;
};

// Validates the whole table against the schema for its kind and returns the
// populated config. Throws ConfigError carrying every offending field, or
// toml::ParseError for syntax problems (load_config only).
ExperimentConfig config_from_table(const toml::Table& table);
ExperimentConfig load_config(const std::string& path);

// "0.25", "45 deg", "0.7 rad" -> radians. Bare numbers are radians.
double angle_to_radians(const toml::Value& value);

} // namespace fockforge
