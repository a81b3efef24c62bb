#pragma once

#include <vector>

namespace fockforge {

// y ~ offset + amplitude * cos(frequency * x - phase), frequency in integer
// cycles per 2 pi of x.
struct FringeFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    int frequency = 0;
    double visibility = 0.0; // amplitude/offset clamped to [0, 1]
    double visibility_err = 0.0;
    double residual_rms = 0.0;
};

// Linear least squares at each candidate frequency; the best residual wins.
// Default candidates {1, 2, 4} match the one-, two-, and four-photon scans.
// Requires at least 8 points. Throws std::invalid_argument otherwise.
FringeFit fit_fringe(const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<int>& candidates = {1, 2, 4});

// y ~ baseline + amplitude / (1 + (2 (x - center) / fwhm)^2). amplitude may
// be negative (a dip). Levenberg-Marquardt; throws std::runtime_error with
// the residual when it fails to converge, std::invalid_argument on fewer
// than 8 points.
struct LorentzianFit {
    double baseline = 0.0;
    double amplitude = 0.0;
    double center = 0.0;
    double fwhm = 0.0;
    double residual_rms = 0.0;
    int iterations = 0;
};

LorentzianFit fit_lorentzian(const std::vector<double>& x,
                             const std::vector<double>& y);

// Lorentzian dip refit in visibility terms: c_max is the baseline, c_min the
// level at the dip center, V = (c_max - c_min)/c_max.
struct DipFit {
    double c_max = 0.0;
    double c_min = 0.0;
    double visibility = 0.0;
    double visibility_err = 0.0;
    double center = 0.0;
    double fwhm = 0.0;
    double residual_rms = 0.0;
};

DipFit fit_dip(const std::vector<double>& x, const std::vector<double>& y);

} // namespace fockforge
