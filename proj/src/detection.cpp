#include "fockforge/detection.hpp"

#include <cmath>
#include <stdexcept>

#include "fockforge/combinatorics.hpp"
#include "fockforge/sfwm_source.hpp"

namespace fockforge {

namespace {

void check_model(const DetectorModel& model) {
    if (!(model.efficiency >= 0.0 && model.efficiency <= 1.0))
        throw std::invalid_argument("detector efficiency must lie in [0, 1]");
    if (!(model.dark_click_prob >= 0.0 && model.dark_click_prob <= 1.0))
        throw std::invalid_argument("dark click probability must lie in [0, 1]");
}

void check_tree(const DetectionTree& tree) {
    if (tree.detectors_h < 1 || tree.detectors_v < 1)
        throw std::invalid_argument("each port needs at least one detector");
}

Eigen::MatrixXd distribution_from_amps(const Eigen::VectorXd& probs, int side) {
    Eigen::MatrixXd p(side, side);
    for (int h = 0; h < side; ++h)
        for (int v = 0; v < side; ++v)
            // rotating a density matrix can leave populations a rounding
            // error below zero; probabilities must not
            p(h, v) = std::max(probs[h * side + v], 0.0);
    return p;
}

} // namespace

Eigen::MatrixXd port_number_distribution(const FockVector& psi,
                                         const WavePlateSetting& setting) {
    FockVector rotated = induced_unitary(su2_from_angles(setting), psi);
    return distribution_from_amps(number_distribution(rotated), psi.side());
}

Eigen::MatrixXd port_number_distribution(const DensityMatrix& rho,
                                         const WavePlateSetting& setting) {
    DensityMatrix rotated = induced_unitary(su2_from_angles(setting), rho);
    return distribution_from_amps(number_distribution(rotated), rho.side());
}

Eigen::VectorXd fanout_click_probs(int n_photons, int detectors,
                                   const DetectorModel& model) {
    if (n_photons < 0)
        throw std::invalid_argument("photon number must be >= 0");
    if (detectors < 1)
        throw std::invalid_argument("need at least one detector");
    check_model(model);

    const int d = detectors;
    const double eff = model.efficiency;

    // occupancy walk: each photon is lost with prob 1-eff, otherwise lands
    // on one of the d detectors uniformly
    Eigen::VectorXd occupied = Eigen::VectorXd::Zero(d + 1);
    occupied[0] = 1.0;
    for (int photon = 0; photon < n_photons; ++photon) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(d + 1);
        for (int j = 0; j <= d; ++j) {
            double p = occupied[j];
            if (p == 0.0) continue;
            next[j] += p * (1.0 - eff + eff * j / d);
            if (j < d) next[j + 1] += p * eff * (d - j) / d;
        }
        occupied = next;
    }

    // silent detectors may still dark-click
    const double dark = model.dark_click_prob;
    Eigen::VectorXd clicks = Eigen::VectorXd::Zero(d + 1);
    for (int j = 0; j <= d; ++j) {
        if (occupied[j] == 0.0) continue;
        for (int extra = 0; extra <= d - j; ++extra)
            clicks[j + extra] += occupied[j] * binomial(d - j, extra) *
                                 std::pow(dark, extra) *
                                 std::pow(1.0 - dark, d - j - extra);
    }
    return clicks;
}

Eigen::MatrixXd click_class_probs(const Eigen::MatrixXd& port_dist,
                                  const DetectionTree& tree,
                                  const DetectorModel& model) {
    check_tree(tree);
    const int side = static_cast<int>(port_dist.rows());

    std::vector<Eigen::VectorXd> fan_h(side), fan_v(side);
    for (int n = 0; n < side; ++n) {
        fan_h[n] = fanout_click_probs(n, tree.detectors_h, model);
        fan_v[n] = fanout_click_probs(n, tree.detectors_v, model);
    }

    Eigen::MatrixXd out =
        Eigen::MatrixXd::Zero(tree.detectors_h + 1, tree.detectors_v + 1);
    for (int k = 0; k < side; ++k)
        for (int m = 0; m < side; ++m) {
            double p = port_dist(k, m);
            if (p == 0.0) continue;
            out += p * (fan_h[k] * fan_v[m].transpose());
        }
    return out;
}

double coincidence_probability(const FockVector& psi,
                               const WavePlateSetting& setting,
                               const DetectionTree& tree,
                               const DetectorModel& model,
                               const ClickPattern& pattern) {
    check_tree(tree);
    if (pattern.clicks_h < 0 || pattern.clicks_h > tree.detectors_h ||
        pattern.clicks_v < 0 || pattern.clicks_v > tree.detectors_v)
        throw std::invalid_argument(
            "click pattern does not fit the detection tree");
    Eigen::MatrixXd classes =
        click_class_probs(port_number_distribution(psi, setting), tree, model);
    return classes(pattern.clicks_h, pattern.clicks_v);
}

std::int64_t sample_counts(double prob_per_pulse, double rep_rate_hz,
                           double integration_s, Rng& rng) {
    if (!(prob_per_pulse >= 0.0 && prob_per_pulse <= 1.0))
        throw std::invalid_argument("probability per pulse must lie in [0, 1]");
    if (rep_rate_hz < 0.0 || integration_s < 0.0)
        throw std::invalid_argument("rate and integration time must be >= 0");
    return rng.poisson(prob_per_pulse * rep_rate_hz * integration_s);
}

std::vector<double> hom_scan(const std::vector<double>& delays_ps,
                             double visibility, double envelope_fwhm_ps) {
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw std::invalid_argument("visibility must lie in [0, 1]");
    std::vector<double> curve;
    curve.reserve(delays_ps.size());
    for (double tau : delays_ps)
        curve.push_back(1.0 - visibility * delay_overlap(tau, envelope_fwhm_ps));
    return curve;
}

std::vector<double> fringe_scan(const FockVector& psi,
                                const std::vector<double>& phis, double theta,
                                const DetectionTree& tree,
                                const DetectorModel& model,
                                const ClickPattern& pattern) {
    std::vector<double> curve;
    curve.reserve(phis.size());
    for (double phi : phis)
        curve.push_back(coincidence_probability(
            psi, WavePlateSetting(phi, theta), tree, model, pattern));
    return curve;
}

} // namespace fockforge
