#include "fockforge/sfwm_source.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fockforge/combinatorics.hpp"

namespace fockforge {

SqueezeParams SqueezeParams::from_pair_probability(double pairs_per_pulse) {
    if (!(pairs_per_pulse >= 0.0 && pairs_per_pulse <= 0.25))
        throw std::invalid_argument(
            "from_pair_probability: pair probability must lie in [0, 1/4]");
    // solve g^2 (1 - g^2) = p for the small root
    double g2 = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * pairs_per_pulse));
    SqueezeParams params;
    params.r = std::atanh(std::sqrt(g2));
    return params;
}

double pair_probability(const SqueezeParams& params) {
    double g2 = params.gamma() * params.gamma();
    return (1.0 - g2) * g2;
}

double db_to_transmissivity(double db) {
    return std::pow(10.0, -db / 10.0);
}

LossTotals loss_budget_total(const LossBudget& budget) {
    double sum = budget.waveguide_db + budget.coupler_db +
                 budget.manipulation_db + budget.filters_db +
                 budget.detector_db;
    return {sum, db_to_transmissivity(sum), budget.stated_total_db,
            db_to_transmissivity(budget.stated_total_db)};
}

FockVector squeezed_two_mode_state(const SqueezeParams& params, int cutoff) {
    if (!(params.r >= 0.0) || !std::isfinite(params.r))
        throw std::invalid_argument("squeeze parameter must be finite and >= 0");
    FockVector psi(cutoff);
    const double g = params.gamma();

    // per-mode coefficients of exp(g/2 (adag)^2)|0>: (g/2)^k sqrt((2k)!)/k!
    const int k_max = cutoff / 2;
    std::vector<double> coeff(k_max + 1);
    for (int k = 0; k <= k_max; ++k)
        coeff[k] = std::pow(0.5 * g, k) * std::sqrt(factorial(2 * k)) /
                   factorial(k);

    for (int a = 0; a <= k_max; ++a)
        for (int b = 0; b <= k_max; ++b)
            psi.at(2 * a, 2 * b) = coeff[a] * coeff[b];

    // untruncated squared norm is cosh^2 r; the deficit is the weight of the
    // true normalized state beyond the cutoff
    double kept = psi.squared_norm();
    double full = params.cosh_r() * params.cosh_r();
    psi.truncated_mass = std::max(0.0, 1.0 - kept / full);
    psi.amps /= std::sqrt(kept);
    return psi;
}

FockVector single_pump_pair_state(const SqueezeParams& params, int cutoff) {
    if (!(params.r >= 0.0) || !std::isfinite(params.r))
        throw std::invalid_argument("squeeze parameter must be finite and >= 0");
    FockVector psi(cutoff);
    const double g = params.gamma();
    for (int k = 0; k <= cutoff; ++k)
        psi.at(k, k) = std::pow(g, k);
    // untruncated squared norm is the geometric sum 1/(1-g^2)
    double kept = psi.squared_norm();
    psi.truncated_mass = std::max(0.0, 1.0 - kept * (1.0 - g * g));
    psi.amps /= std::sqrt(kept);
    return psi;
}

FockVector post_select_total(const FockVector& psi, int total_photons) {
    FockVector out(psi.cutoff);
    const int side = psi.side();
    for (int h = 0; h < side; ++h) {
        int v = total_photons - h;
        if (v < 0 || v >= side) continue;
        out.at(h, v) = psi.at(h, v);
    }
    double norm2 = out.squared_norm();
    if (norm2 <= 0.0)
        throw std::invalid_argument(
            "post_select_total: no amplitude at the requested photon number");
    out.amps /= std::sqrt(norm2);
    return out;
}

FockVector ideal_2n_state(int n, int cutoff) {
    if (n < 0 || 2 * n > cutoff)
        throw std::invalid_argument("ideal_2n_state: need 0 <= 2n <= cutoff");
    FockVector psi(cutoff);
    double scale = std::pow(2.0, n) * factorial(n);
    for (int j = 0; j <= n; ++j)
        psi.at(2 * j, 2 * (n - j)) =
            binomial(n, j) *
            std::sqrt(factorial(2 * j) * factorial(2 * (n - j))) / scale;
    // unit norm analytically; scrub rounding
    return psi.normalized();
}

double pair_rate(const PumpConfig& pump, PumpMode mode) {
    if (pump.p1_uw < 0.0 || pump.p2_uw < 0.0)
        throw std::invalid_argument("pump powers must be >= 0");
    if (mode == PumpMode::dual)
        return pump.p1_uw * pump.p2_uw;
    return pump.p1_uw * pump.p1_uw;
}

double delay_overlap(double delay_ps, double fwhm_ps) {
    if (!(fwhm_ps > 0.0))
        throw std::invalid_argument("delay_overlap: fwhm must be > 0");
    double u = 2.0 * delay_ps / fwhm_ps;
    return 1.0 / (1.0 + u * u);
}

double pulse_width_tbp(double input_fwhm_ps, double input_bw_nm,
                       double filter_bw_nm) {
    if (!(input_bw_nm > 0.0) || !(filter_bw_nm > 0.0))
        throw std::invalid_argument("pulse_width_tbp: bandwidths must be > 0");
    return input_fwhm_ps * input_bw_nm / filter_bw_nm;
}

BrightnessReport brightness_estimate(const PumpConfig& pump,
                                     const BrightnessReference& reference,
                                     const LossBudget& losses,
                                     double postprocessing_factor) {
    if (!(reference.power_uw > 0.0))
        throw std::invalid_argument("brightness reference power must be > 0");
    BrightnessReport report;
    report.pairs_per_pulse = reference.pairs_per_pulse * pump.p1_uw *
                             pump.p2_uw /
                             (reference.power_uw * reference.power_uw);
    report.four_photon_per_pulse =
        report.pairs_per_pulse * report.pairs_per_pulse;
    report.four_photon_generated_hz =
        report.four_photon_per_pulse * pump.rep_rate_hz;
    double per_photon = db_to_transmissivity(losses.stated_total_db);
    report.four_fold_detected_hz = report.four_photon_generated_hz *
                                   std::pow(per_photon, 4) *
                                   postprocessing_factor;
    return report;
}

} // namespace fockforge
