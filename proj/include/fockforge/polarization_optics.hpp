#pragma once

#include <Eigen/Dense>
#include <complex>

namespace fockforge {

// 2x2 unitary acting on the (H, V) polarization pair. Jones convention:
// H = (1,0)^T, V = (0,1)^T, time dependence exp(-i w t).
using ModeTransform = Eigen::Matrix2cd;

bool is_unitary(const ModeTransform& u, double tol = 1e-12);

// Wave-plate gadget parameters (radians). phi canonicalizes into [0, 2pi),
// theta into [0, pi).
struct WavePlateSetting {
    double phi = 0.0;
    double theta = 0.0;

    WavePlateSetting() = default;
    WavePlateSetting(double phi_, double theta_);
};

// U(phi, theta) = [[cos t, e^{i phi} sin t], [-e^{-i phi} sin t, cos t]]
ModeTransform su2_from_angles(const WavePlateSetting& s);
ModeTransform su2_from_angles(double phi, double theta);

// Jones matrices for ideal retarders with fast axis at angle alpha from H.
// Both carry the global phase that puts them in SU(2), so that
// jones_qwp(a) * jones_qwp(a) == jones_hwp(a) exactly.
ModeTransform jones_hwp(double alpha);
ModeTransform jones_qwp(double alpha);

// b after a: compose(a, b) = b * a
ModeTransform compose(const ModeTransform& a, const ModeTransform& b);

// Fast-axis angles realizing a target unitary as QWP -> HWP -> QWP
// (qwp_in applied first): target ~ jones_qwp(qwp_out) * jones_hwp(hwp) *
// jones_qwp(qwp_in) up to a global phase.
struct WavePlateTriple {
    double qwp_in = 0.0;
    double hwp = 0.0;
    double qwp_out = 0.0;
};

// Closed-form decomposition; recomposes to the target within 1e-9 (verified
// internally, throws std::runtime_error on failure). Throws
// std::invalid_argument if target is not unitary.
WavePlateTriple solve_angles_for_target(const ModeTransform& target);

// Frobenius distance minimized over a global phase: min_phi |a - e^{i phi} b|
double distance_up_to_phase(const ModeTransform& a, const ModeTransform& b);

} // namespace fockforge
