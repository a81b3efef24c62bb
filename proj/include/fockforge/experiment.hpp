#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fockforge/config.hpp"

namespace fockforge {

inline constexpr const char* kVersion = "0.1.0";

struct FileEntry {
    std::string name; // relative to the output directory
    std::uint64_t bytes = 0;
    std::string fnv1a64; // 16 hex digits
};

struct RunReport {
    std::string kind;
    bool sampled = false; // poisson draws (seeded) vs exact expected values
    std::uint64_t seed = 0;
    bool converged = true;
    std::map<std::string, double> results;
    std::map<std::string, std::string> notes;
    std::vector<FileEntry> files; // data files, hashed
    std::map<std::string, std::string> config_echo;
};

// FNV-1a 64-bit, rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

// Integers render without a decimal point, everything else as the shortest
// string that parses back to the same double. Shared by every data file and
// the text report so re-runs are byte-identical.
std::string format_number(double value);

// Runs the configured experiment, writing its data files plus report.json and
// report.txt under config.output_dir (created if missing). Numerical
// non-convergence is reported via report.converged and a note, not thrown.
RunReport run_experiment(const ExperimentConfig& config);

std::string report_to_json(const RunReport& report);
std::string report_to_text(const RunReport& report);

} // namespace fockforge
