#include "fockforge/fock_core.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fockforge/combinatorics.hpp"

namespace fockforge {

namespace {

constexpr int kMaxFactorialArg = 64;

const long double* factorial_table() {
    static long double table[kMaxFactorialArg + 1] = {};
    if (table[0] == 0.0L) {
        table[0] = 1.0L;
        for (int n = 1; n <= kMaxFactorialArg; ++n)
            table[n] = table[n - 1] * static_cast<long double>(n);
    }
    return table;
}

void check_cutoff(int cutoff) {
    if (cutoff < 0 || 2 * cutoff > kMaxFactorialArg)
        throw std::invalid_argument("cutoff out of supported range");
}

} // namespace

double factorial(int n) {
    if (n < 0 || n > kMaxFactorialArg)
        throw std::invalid_argument("factorial argument out of range");
    return static_cast<double>(factorial_table()[n]);
}

double binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n)
        return 0.0;
    if (n > kMaxFactorialArg)
        throw std::invalid_argument("binomial argument out of range");
    const long double* f = factorial_table();
    return static_cast<double>(f[n] / (f[k] * f[n - k]));
}

FockVector::FockVector(int cutoff_) : cutoff(cutoff_) {
    check_cutoff(cutoff_);
    amps = Eigen::VectorXcd::Zero(dim());
}

FockVector FockVector::normalized() const {
    FockVector out = *this;
    double n = std::sqrt(squared_norm());
    if (n == 0.0)
        throw std::invalid_argument("cannot normalize a zero state");
    out.amps /= n;
    return out;
}

DensityMatrix::DensityMatrix(int cutoff_) : cutoff(cutoff_) {
    check_cutoff(cutoff_);
    mat = Eigen::MatrixXcd::Zero(dim(), dim());
}

bool DensityMatrix::is_hermitian(double tol) const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

FockVector number_state(int n_h, int n_v, int cutoff) {
    FockVector psi(cutoff);
    if (n_h < 0 || n_v < 0 || n_h > cutoff || n_v > cutoff)
        throw std::out_of_range("number_state: occupation outside [0, cutoff]");
    psi.at(n_h, n_v) = 1.0;
    return psi;
}

DensityMatrix from_pure(const FockVector& psi) {
    DensityMatrix rho(psi.cutoff);
    rho.mat = psi.amps * psi.amps.adjoint();
    rho.truncated_mass = psi.truncated_mass;
    return rho;
}

FockVector apply_raising(const FockVector& psi, Mode mode) {
    FockVector out(psi.cutoff);
    out.truncated_mass = psi.truncated_mass;
    const int side = psi.side();
    for (int nh = 0; nh < side; ++nh) {
        for (int nv = 0; nv < side; ++nv) {
            std::complex<double> a = psi.at(nh, nv);
            if (a == std::complex<double>(0.0)) continue;
            int n = (mode == Mode::H) ? nh : nv;
            if (n == psi.cutoff) {
                out.truncated_mass += static_cast<double>(n + 1) * std::norm(a);
                continue;
            }
            std::complex<double> raised = std::sqrt(static_cast<double>(n + 1)) * a;
            if (mode == Mode::H)
                out.at(nh + 1, nv) += raised;
            else
                out.at(nh, nv + 1) += raised;
        }
    }
    return out;
}

Eigen::MatrixXcd sector_unitary(const ModeTransform& u, int total_photons) {
    if (total_photons < 0 || total_photons > kMaxFactorialArg / 2)
        throw std::invalid_argument("sector_unitary: total photon number out of range");
    const int n = total_photons;
    const std::complex<double> a = u(0, 0), b = u(0, 1), c = u(1, 0), d = u(1, 1);
    const long double* f = factorial_table();

    // powers up to n
    std::vector<std::complex<double>> pa(n + 1), pb(n + 1), pc(n + 1), pd(n + 1);
    pa[0] = pb[0] = pc[0] = pd[0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        pa[i] = pa[i - 1] * a;
        pb[i] = pb[i - 1] * b;
        pc[i] = pc[i - 1] * c;
        pd[i] = pd[i - 1] * d;
    }

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int s = 0; s <= n; ++s) {
        const int k = n - s; // photons in H of column basis state |k, s>
        for (int sp = 0; sp <= n; ++sp) {
            const int kp = n - sp;
            // coefficient of x^kp y^sp in (a x + c y)^k (b x + d y)^s
            std::complex<double> acc = 0.0;
            int p_lo = std::max(0, kp - s);
            int p_hi = std::min(k, kp);
            for (int p = p_lo; p <= p_hi; ++p) {
                int q = kp - p;
                acc += binomial(k, p) * binomial(s, q) *
                       pa[p] * pc[k - p] * pb[q] * pd[s - q];
            }
            long double scale = std::sqrt(f[kp] * f[sp] / (f[k] * f[s]));
            m(sp, s) = acc * static_cast<double>(scale);
        }
    }
    return m;
}

FockVector induced_unitary(const ModeTransform& u, const FockVector& psi) {
    if (!is_unitary(u, 1e-12))
        throw std::invalid_argument("induced_unitary: transform is not unitary within 1e-12");
    FockVector out(psi.cutoff);
    out.truncated_mass = psi.truncated_mass;
    const int c = psi.cutoff;
    for (int n = 0; n <= 2 * c; ++n) {
        int s_lo = std::max(0, n - c);
        int s_hi = std::min(n, c);
        bool occupied = false;
        for (int s = s_lo; s <= s_hi && !occupied; ++s)
            occupied = psi.at(n - s, s) != std::complex<double>(0.0);
        if (!occupied) continue;

        Eigen::VectorXcd in = Eigen::VectorXcd::Zero(n + 1);
        for (int s = s_lo; s <= s_hi; ++s)
            in[s] = psi.at(n - s, s);
        Eigen::VectorXcd lifted = sector_unitary(u, n) * in;
        for (int s = 0; s <= n; ++s) {
            if (s < s_lo || s > s_hi)
                out.truncated_mass += std::norm(lifted[s]);
            else
                out.at(n - s, s) = lifted[s];
        }
    }
    return out;
}

Eigen::MatrixXcd full_lift(const ModeTransform& u, int cutoff) {
    if (!is_unitary(u, 1e-12))
        throw std::invalid_argument("full_lift: transform is not unitary within 1e-12");
    check_cutoff(cutoff);
    const int side = cutoff + 1;
    const int dim = side * side;
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n <= 2 * cutoff; ++n) {
        Eigen::MatrixXcd m = sector_unitary(u, n);
        int s_lo = std::max(0, n - cutoff);
        int s_hi = std::min(n, cutoff);
        for (int sp = s_lo; sp <= s_hi; ++sp)
            for (int s = s_lo; s <= s_hi; ++s)
                big((n - sp) * side + sp, (n - s) * side + s) = m(sp, s);
    }
    return big;
}

DensityMatrix induced_unitary(const ModeTransform& u, const DensityMatrix& rho) {
    Eigen::MatrixXcd big = full_lift(u, rho.cutoff);
    DensityMatrix out(rho.cutoff);
    out.mat = big * rho.mat * big.adjoint();
    out.truncated_mass = rho.truncated_mass + (rho.trace() - out.mat.trace().real());
    return out;
}

double fidelity_trace(const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
    if (rho_a.cutoff != rho_b.cutoff)
        throw std::invalid_argument("fidelity_trace: dimension mismatch");
    return rho_a.mat.transpose().cwiseProduct(rho_b.mat).sum().real();
}

double fidelity_with_state(const DensityMatrix& rho, const FockVector& psi) {
    if (rho.cutoff != psi.cutoff)
        throw std::invalid_argument("fidelity_with_state: dimension mismatch");
    return (psi.amps.adjoint() * rho.mat * psi.amps)(0).real();
}

namespace {

// A_j |n> = sqrt(C(n,j) eta^(n-j) (1-eta)^j) |n-j>
std::vector<Eigen::MatrixXd> loss_kraus(int cutoff, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("loss transmissivity must lie in [0, 1]");
    const int side = cutoff + 1;
    std::vector<Eigen::MatrixXd> ops;
    ops.reserve(side);
    for (int j = 0; j <= cutoff; ++j) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(side, side);
        for (int n = j; n <= cutoff; ++n)
            a(n - j, n) = std::sqrt(binomial(n, j) * std::pow(eta, n - j) *
                                    std::pow(1.0 - eta, j));
        ops.push_back(std::move(a));
    }
    return ops;
}

Eigen::MatrixXcd kron_with_identity(const Eigen::MatrixXd& a, int side, bool a_on_h) {
    const int dim = side * side;
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(dim, dim);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            if (a(r, c) == 0.0) continue;
            for (int other = 0; other < side; ++other) {
                if (a_on_h)
                    k(r * side + other, c * side + other) = a(r, c);
                else
                    k(other * side + r, other * side + c) = a(r, c);
            }
        }
    return k;
}

} // namespace

DensityMatrix apply_loss(const DensityMatrix& rho, const LossChannel& loss) {
    const int side = rho.side();
    auto kraus_h = loss_kraus(rho.cutoff, loss.eta_h);
    auto kraus_v = loss_kraus(rho.cutoff, loss.eta_v);

    Eigen::MatrixXcd stage = Eigen::MatrixXcd::Zero(rho.dim(), rho.dim());
    for (const auto& a : kraus_h) {
        Eigen::MatrixXcd k = kron_with_identity(a, side, true);
        stage += k * rho.mat * k.adjoint();
    }
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Zero(rho.dim(), rho.dim());
    for (const auto& b : kraus_v) {
        Eigen::MatrixXcd k = kron_with_identity(b, side, false);
        result += k * stage * k.adjoint();
    }

    DensityMatrix out(rho.cutoff);
    out.mat = std::move(result);
    out.truncated_mass = rho.truncated_mass;
    return out;
}

Eigen::MatrixXd loss_transition_matrix(int cutoff, const LossChannel& loss) {
    if (!(loss.eta_h >= 0.0 && loss.eta_h <= 1.0) ||
        !(loss.eta_v >= 0.0 && loss.eta_v <= 1.0))
        throw std::invalid_argument("loss transmissivity must lie in [0, 1]");
    const int side = cutoff + 1;
    const int dim = side * side;
    auto thin = [](int n, int k, double eta) {
        return binomial(n, k) * std::pow(eta, k) * std::pow(1.0 - eta, n - k);
    };
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim, dim);
    for (int nh = 0; nh < side; ++nh)
        for (int nv = 0; nv < side; ++nv)
            for (int ah = 0; ah <= nh; ++ah)
                for (int av = 0; av <= nv; ++av)
                    t(ah * side + av, nh * side + nv) =
                        thin(nh, ah, loss.eta_h) * thin(nv, av, loss.eta_v);
    return t;
}

Eigen::VectorXd number_distribution(const FockVector& psi) {
    return psi.amps.cwiseAbs2();
}

Eigen::VectorXd number_distribution(const DensityMatrix& rho) {
    return rho.mat.diagonal().real();
}

std::pair<double, double> mean_photon_numbers(const DensityMatrix& rho) {
    const int side = rho.side();
    double nh = 0.0, nv = 0.0;
    for (int h = 0; h < side; ++h)
        for (int v = 0; v < side; ++v) {
            double p = rho.mat(rho.index(h, v), rho.index(h, v)).real();
            nh += h * p;
            nv += v * p;
        }
    return {nh, nv};
}

} // namespace fockforge
