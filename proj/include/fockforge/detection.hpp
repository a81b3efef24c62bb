#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fockforge/fock_core.hpp"
#include "fockforge/polarization_optics.hpp"
#include "fockforge/rng.hpp"

namespace fockforge {

struct DetectorModel {
    double efficiency = 1.0;
    double dark_click_prob = 0.0; // per detector per coincidence window
    bool threshold = true;        // click/no-click rather than number-resolving
};

// Balanced fiber-splitter fan-out behind each PBS output port.
struct DetectionTree {
    int detectors_h = 1;
    int detectors_v = 1;
};

// Detectors behind one balanced fan-out are interchangeable, so a click
// pattern is identified by how many detectors fired on each port.
struct ClickPattern {
    int clicks_h = 0;
    int clicks_v = 0;
};

// Probabilities p(k, m) of finding k photons at the H port and m at the V
// port after the wave-plate gadget and the PBS; (cutoff+1) x (cutoff+1),
// rows = k, cols = m. Sums to 1 for any normalized state within the cutoff.
Eigen::MatrixXd port_number_distribution(const FockVector& psi,
                                         const WavePlateSetting& setting);
Eigen::MatrixXd port_number_distribution(const DensityMatrix& rho,
                                         const WavePlateSetting& setting);

// Distribution over the number of detectors (0..detectors) that click when
// n photons enter a balanced fan-out of threshold detectors. Photons route
// independently and uniformly (exact for a Fock state into a balanced
// splitter tree); each is seen with probability `efficiency`; dark clicks
// are OR-ed onto silent detectors.
Eigen::VectorXd fanout_click_probs(int n_photons, int detectors,
                                   const DetectorModel& model);

// Joint distribution over (clicks on H fan-out, clicks on V fan-out) given
// the per-port photon-number distribution; (detectors_h+1) x (detectors_v+1).
Eigen::MatrixXd click_class_probs(const Eigen::MatrixXd& port_dist,
                                  const DetectionTree& tree,
                                  const DetectorModel& model);

// Probability per pulse of one click pattern after the full chain
// state -> gadget -> PBS -> fan-outs. Throws std::invalid_argument when the
// pattern does not fit the tree.
double coincidence_probability(const FockVector& psi,
                               const WavePlateSetting& setting,
                               const DetectionTree& tree,
                               const DetectorModel& model,
                               const ClickPattern& pattern);

// Poisson draw with mean prob_per_pulse * rep_rate_hz * integration_s.
std::int64_t sample_counts(double prob_per_pulse, double rep_rate_hz,
                           double integration_s, Rng& rng);

// Two-photon interference dip: relative coincidence level 1 - V * L(delay)
// with L the Lorentzian pulse overlap. visibility is the dip depth at zero
// delay (the indistinguishability of the interfering photons).
std::vector<double> hom_scan(const std::vector<double>& delays_ps,
                             double visibility, double envelope_fwhm_ps);

// Coincidence probability of `pattern` versus the gadget phase phi at fixed
// theta; one value per entry of phis.
std::vector<double> fringe_scan(const FockVector& psi,
                                const std::vector<double>& phis, double theta,
                                const DetectionTree& tree,
                                const DetectorModel& model,
                                const ClickPattern& pattern);

} // namespace fockforge
