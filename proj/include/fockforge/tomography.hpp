#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fockforge/detection.hpp"
#include "fockforge/fock_core.hpp"
#include "fockforge/polarization_optics.hpp"

namespace fockforge {

// What the reconstruction treats as one measurement outcome. port_numbers
// assumes number-resolved port occupations (k photons H, m = n - k photons V);
// clicks records the threshold-detector click classes with total clicks = n
// behind the balanced fan-outs, which is how a post-selected n-photon
// experiment actually tags events.
enum class OutcomeKind { port_numbers, clicks };

struct TomoScheme {
    int n_photons = 2;
    OutcomeKind kind = OutcomeKind::port_numbers;
    DetectionTree tree{1, 1};
};

// One recorded outcome: a label plus its POVM effect on the n-photon sector
// (basis |n,0>, |n-1,1>, ..., |0,n>). Port-number effects per setting sum to
// the identity; click classes sum to less (the unselected patterns carry the
// rest), which the likelihood absorbs into a profiled flux.
struct Outcome {
    std::string label;
    Eigen::MatrixXcd effect;
};

std::string port_label(int photons_h, int photons_v); // "n3m1"
std::string click_label(int clicks_h, int clicks_v);  // "c1x3"

std::vector<Outcome> setting_outcomes(const WavePlateSetting& setting,
                                      const TomoScheme& scheme);

struct SettingsDesign {
    std::vector<WavePlateSetting> settings;
    double condition_number; // of the port-number forward map
};

// (n+1)^2 settings: phases 2 pi j/(n+1) crossed with one of two theta
// ladders; the ladder whose forward map is better conditioned wins.
SettingsDesign default_settings(int n_photons);

// Amplitudes of the total-photon-number-n component of psi, index = photons
// in V. Not normalized.
Eigen::VectorXcd sector_amplitudes(const FockVector& psi, int n_photons);

// <t|rho|t> with t normalized first.
double sector_fidelity(const Eigen::MatrixXcd& rho_sector,
                       const Eigen::VectorXcd& target_amps);

// Sector density matrix placed back on the two-mode number basis at
// cutoff = n_photons.
DensityMatrix embed_sector(const Eigen::MatrixXcd& rho_sector, int n_photons);

// Born probabilities tr(E_i rho) in the order of setting_outcomes.
std::vector<double> forward_probs(const Eigen::MatrixXcd& rho_sector,
                                  const WavePlateSetting& setting,
                                  const TomoScheme& scheme);

struct CountRecord {
    int setting_index = 0;
    WavePlateSetting setting{0.0, 0.0};
    std::string outcome;
    std::int64_t counts = 0;
    double integration_s = 1.0;
};

// Least-squares inversion of the forward map. Requires the complete
// port-number outcome set (click classes are not self-normalizing) and
// informationally complete settings; throws with the observed rank when the
// map is deficient. The result is Hermitian with unit trace but may have
// negative eigenvalues.
Eigen::MatrixXcd linear_inversion(const std::vector<CountRecord>& records,
                                  const TomoScheme& scheme);

struct TomoOptions {
    int max_iterations = 100000;
    double tolerance = 1e-10; // relative log-likelihood change
    bool record_trace = false;
};

struct ReconstructionResult {
    Eigen::MatrixXcd rho_sector;
    DensityMatrix rho; // embedded at cutoff = n_photons
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    double flux = 0.0; // profiled counts per unit integration time
    std::vector<double> likelihood_trace; // filled when options.record_trace
};

// Maximum-likelihood reconstruction on the n-photon sector. rho = T^dag T
// normalized, with T lower-triangular; Poisson likelihood with the overall
// flux profiled out, so only relative rates matter and uniformly lossy or
// post-selected outcome sets stay unbiased. Ascent steps are accepted only
// when the likelihood improves, so the trace is non-decreasing by
// construction; hitting max_iterations leaves converged = false.
ReconstructionResult mle_reconstruct(const std::vector<CountRecord>& records,
                                     const TomoScheme& scheme,
                                     const TomoOptions& options = {});

struct FidelityEstimate {
    double fidelity = 0.0;
    double std_dev = 0.0;
    int resamples = 0;
    int failures = 0; // resamples whose reconstruction did not converge
};

// Monte Carlo error bar: each resample redraws every count from Poisson with
// the observed mean, reruns the reconstruction, and evaluates the overlap with
// the target's n-photon component. Deterministic for a fixed seed, whatever
// the thread count; threads = 0 reads FOCKFORGE_THREADS and falls back to
// the hardware count.
FidelityEstimate fidelity_with_errorbars(
    const std::vector<CountRecord>& records, const TomoScheme& scheme,
    const FockVector& target, int resamples, std::uint64_t seed,
    const TomoOptions& options = {}, int threads = 0);

} // namespace fockforge
