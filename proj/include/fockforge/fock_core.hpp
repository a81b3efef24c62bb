#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "fockforge/polarization_optics.hpp"

namespace fockforge {

inline constexpr int kDefaultCutoff = 8;

enum class Mode { H, V };

// Pure state of two polarization modes in a truncated photon-number basis.
// Basis label (nH, nV), both in [0, cutoff], flattened row-major:
// index = nH * (cutoff + 1) + nV.
//
// truncated_mass is a diagnostic: squared norm silently dropped by operations
// that push amplitude past the cutoff. It is carried along (never reset by
// normalize) so a pipeline can assert its total truncation error at the end.
struct FockVector {
    int cutoff = kDefaultCutoff;
    Eigen::VectorXcd amps;
    double truncated_mass = 0.0;

    explicit FockVector(int cutoff_ = kDefaultCutoff);

    int side() const { return cutoff + 1; }
    int dim() const { return side() * side(); }
    int index(int n_h, int n_v) const { return n_h * side() + n_v; }

    std::complex<double>& at(int n_h, int n_v) { return amps[index(n_h, n_v)]; }
    const std::complex<double>& at(int n_h, int n_v) const { return amps[index(n_h, n_v)]; }

    double squared_norm() const { return amps.squaredNorm(); }
    FockVector normalized() const;
};

// Mixed state over the same flattened basis. Same truncation diagnostic;
// for density matrices it shows up as trace deficit.
struct DensityMatrix {
    int cutoff = kDefaultCutoff;
    Eigen::MatrixXcd mat;
    double truncated_mass = 0.0;

    explicit DensityMatrix(int cutoff_ = kDefaultCutoff);

    int side() const { return cutoff + 1; }
    int dim() const { return side() * side(); }
    int index(int n_h, int n_v) const { return n_h * side() + n_v; }

    double trace() const { return mat.trace().real(); }
    bool is_hermitian(double tol = 1e-10) const;
};

// |nH, nV>. Throws std::out_of_range unless 0 <= n <= cutoff.
FockVector number_state(int n_h, int n_v, int cutoff = kDefaultCutoff);

DensityMatrix from_pure(const FockVector& psi);

// Creation operator on one mode; result is unnormalized (norm^2 grows by
// n+1 per basis term). Amplitude raised past the cutoff is dropped and
// accounted in truncated_mass.
FockVector apply_raising(const FockVector& psi, Mode mode);

// (N+1) x (N+1) matrix of the mode transform lifted to the N-photon sector,
// basis |N,0>, |N-1,1>, ..., |0,N> (index counts photons in V, so the
// one-photon sector is u itself). Substitution convention
// adag_j -> sum_i u(i,j) bdag_i, which makes the lift a homomorphism:
// sector_unitary(u*v, N) = sector_unitary(u, N) * sector_unitary(v, N).
Eigen::MatrixXcd sector_unitary(const ModeTransform& u, int total_photons);

// Photon-number-conserving lift of u applied to a state. Sectors with more
// than cutoff photons in one mode truncate; the dropped squared norm is added
// to truncated_mass. Throws std::invalid_argument if u is not unitary within
// 1e-12.
FockVector induced_unitary(const ModeTransform& u, const FockVector& psi);
DensityMatrix induced_unitary(const ModeTransform& u, const DensityMatrix& rho);

// The full lifted matrix on the flattened basis (block-diagonal over total
// photon number). Mostly useful for callers that reuse it across many states.
Eigen::MatrixXcd full_lift(const ModeTransform& u, int cutoff);

// Tr(rho_a * rho_b), real part. For a pure rho_b this is the usual overlap
// fidelity. Throws std::invalid_argument on dimension mismatch.
double fidelity_trace(const DensityMatrix& rho_a, const DensityMatrix& rho_b);

// <psi| rho |psi>
double fidelity_with_state(const DensityMatrix& rho, const FockVector& psi);

// Independent binomial loss on each mode, Kraus representation; exactly trace
// preserving on the truncated basis (loss only lowers photon number).
struct LossChannel {
    double eta_h = 1.0;
    double eta_v = 1.0;
};

DensityMatrix apply_loss(const DensityMatrix& rho, const LossChannel& loss);

// Action of the same channel on photon-number distributions (the diagonal):
// columns indexed by input label, rows by output label. Stochastic.
Eigen::MatrixXd loss_transition_matrix(int cutoff, const LossChannel& loss);

// |amps|^2 over the flattened basis.
Eigen::VectorXd number_distribution(const FockVector& psi);
Eigen::VectorXd number_distribution(const DensityMatrix& rho);

// (<nH>, <nV>)
std::pair<double, double> mean_photon_numbers(const DensityMatrix& rho);

} // namespace fockforge
