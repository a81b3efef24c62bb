#include "fockforge/polarization_optics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace fockforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_into(double x, double period) {
    double y = std::fmod(x, period);
    if (y < 0.0) y += period;
    return y;
}

} // namespace

bool is_unitary(const ModeTransform& u, double tol) {
    return (u.adjoint() * u - ModeTransform::Identity()).cwiseAbs().maxCoeff() <= tol;
}

WavePlateSetting::WavePlateSetting(double phi_, double theta_)
    : phi(wrap_into(phi_, kTwoPi)), theta(wrap_into(theta_, kPi)) {}

ModeTransform su2_from_angles(const WavePlateSetting& s) {
    return su2_from_angles(s.phi, s.theta);
}

ModeTransform su2_from_angles(double phi, double theta) {
    const std::complex<double> i(0.0, 1.0);
    double c = std::cos(theta);
    double s = std::sin(theta);
    ModeTransform u;
    u << c, std::exp(i * phi) * s,
        -std::exp(-i * phi) * s, c;
    return u;
}

ModeTransform jones_hwp(double alpha) {
    const std::complex<double> mi(0.0, -1.0);
    double c2 = std::cos(2.0 * alpha);
    double s2 = std::sin(2.0 * alpha);
    ModeTransform u;
    u << mi * c2, mi * s2,
         mi * s2, -mi * c2;
    return u;
}

ModeTransform jones_qwp(double alpha) {
    const std::complex<double> i(0.0, 1.0);
    const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    double c2 = std::cos(2.0 * alpha);
    double s2 = std::sin(2.0 * alpha);
    ModeTransform u;
    u << inv_sqrt2 * (1.0 - i * c2), inv_sqrt2 * (-i * s2),
         inv_sqrt2 * (-i * s2), inv_sqrt2 * (1.0 + i * c2);
    return u;
}

ModeTransform compose(const ModeTransform& a, const ModeTransform& b) {
    return b * a;
}

double distance_up_to_phase(const ModeTransform& a, const ModeTransform& b) {
    // min over |lambda|=1 of ||a - lambda b||, attained at lambda = T*/|T|
    // with T = tr(a^dag b). Align explicitly so exact matches come out at
    // machine precision instead of the sqrt-of-cancellation noise floor.
    std::complex<double> t = (a.adjoint() * b).trace();
    double mag = std::abs(t);
    if (mag == 0.0)
        return std::sqrt(a.squaredNorm() + b.squaredNorm());
    return (a - (std::conj(t) / mag) * b).norm();
}

// Quaternion picture: Q(a) and H(a) are rotations by pi/2 and pi about the
// equatorial axis (sin 2a, 0, cos 2a), so with doubled fast-axis angles
// A = 2 q_out, B = 2 h, G = 2 q_in the product Q H Q has quaternion
//   w = -cos(S) cos(D),  y =  cos(S) sin(D)
//   x = -sin(S) cos(M),  z =  sin(S) sin(M)
// where S = (A + G)/2 - B + ... reduced to S = ((A-B) + (G-B))/2,
// D = ((G-B) - (A-B))/2, M = B + S. Inverting these gives the plate angles.
WavePlateTriple solve_angles_for_target(const ModeTransform& target) {
    if (!is_unitary(target, 1e-9))
        throw std::invalid_argument("solve_angles_for_target: target is not unitary");

    std::complex<double> det = target.determinant();
    ModeTransform t = target / std::sqrt(det);

    // components of t = w I - i (x sx + y sy + z sz)
    double w = 0.5 * (t(0, 0) + t(1, 1)).real();
    double x = -0.5 * (t(0, 1) + t(1, 0)).imag();
    double y = 0.5 * (t(1, 0) - t(0, 1)).real();
    double z = 0.5 * (t(1, 1) - t(0, 0)).imag();

    double cs = std::hypot(w, y);
    double sn = std::hypot(x, z);
    double S = std::atan2(sn, cs);
    double D = cs > 1e-14 ? std::atan2(y, -w) : 0.0;
    double M = sn > 1e-14 ? std::atan2(z, -x) : 0.0;

    WavePlateTriple angles;
    angles.qwp_out = wrap_into(0.5 * (M - D), kPi);
    angles.hwp = wrap_into(0.5 * (M - S), kPi);
    angles.qwp_in = wrap_into(0.5 * (M + D), kPi);

    ModeTransform rebuilt =
        jones_qwp(angles.qwp_out) * jones_hwp(angles.hwp) * jones_qwp(angles.qwp_in);
    double err = distance_up_to_phase(rebuilt, target);
    if (err > 1e-9) {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "solve_angles_for_target: recomposition error %.3e", err);
        throw std::runtime_error(buf);
    }
    return angles;
}

} // namespace fockforge
