#include "fockforge/curve_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace fockforge {

namespace {

void check_points(const std::vector<double>& x, const std::vector<double>& y,
                  std::size_t minimum) {
    if (x.size() != y.size())
        throw std::invalid_argument("x and y must have the same length");
    if (x.size() < minimum)
        throw std::invalid_argument("too few points to fit");
}

struct LmResult {
    Eigen::Vector4d params; // baseline, amplitude, center, fwhm
    Eigen::Matrix4d covariance;
    double residual_rms;
    int iterations;
};

double lorentzian_ssr(const std::vector<double>& x, const std::vector<double>& y,
                      const Eigen::Vector4d& p) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double u = 2.0 * (x[i] - p[2]) / p[3];
        double r = y[i] - (p[0] + p[1] / (1.0 + u * u));
        ssr += r * r;
    }
    return ssr;
}

LmResult lm_lorentzian(const std::vector<double>& x,
                       const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());

    auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
    double ymin = *min_it, ymax = *max_it;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n;

    // the baseline is whichever extreme most of the data hugs
    bool dip = (ymax - mean) < (mean - ymin);
    double b0 = dip ? ymax : ymin;
    double a0 = dip ? ymin - ymax : ymax - ymin;
    double c0 = dip ? x[std::distance(y.begin(), min_it)]
                    : x[std::distance(y.begin(), max_it)];

    auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    double span = *xmax_it - *xmin_it;
    // width of the region more than half the full depth from the baseline
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < n; ++i)
        if (std::abs(y[i] - b0) > 0.5 * std::abs(a0)) {
            lo = std::min(lo, x[i]);
            hi = std::max(hi, x[i]);
        }
    double w0 = (hi > lo) ? (hi - lo) : span / 4.0;
    if (!(w0 > 0.0)) w0 = span > 0.0 ? span / 4.0 : 1.0;

    Eigen::Vector4d p(b0, a0, c0, w0);
    double ssr = lorentzian_ssr(x, y, p);
    double lambda = 1e-3;
    int iter = 0;
    Eigen::MatrixXd jac(n, 4);

    for (; iter < 500; ++iter) {
        Eigen::VectorXd resid(n);
        for (int i = 0; i < n; ++i) {
            double u = 2.0 * (x[i] - p[2]) / p[3];
            double lor = 1.0 / (1.0 + u * u);
            resid[i] = y[i] - (p[0] + p[1] * lor);
            jac(i, 0) = 1.0;
            jac(i, 1) = lor;
            jac(i, 2) = 4.0 * p[1] * u * lor * lor / p[3];
            jac(i, 3) = 2.0 * p[1] * u * u * lor * lor / p[3];
        }
        Eigen::Matrix4d jtj = jac.transpose() * jac;
        Eigen::Vector4d jtr = jac.transpose() * resid;

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::Matrix4d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            Eigen::Vector4d delta = damped.ldlt().solve(jtr);
            Eigen::Vector4d trial = p + delta;
            if (trial[3] > 0.0) {
                double trial_ssr = lorentzian_ssr(x, y, trial);
                if (trial_ssr <= ssr) {
                    bool done = (ssr - trial_ssr) <= 1e-13 * (1.0 + trial_ssr);
                    p = trial;
                    ssr = trial_ssr;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    stepped = true;
                    if (done) {
                        LmResult result;
                        result.params = p;
                        double dof = std::max(1, n - 4);
                        result.covariance = (ssr / dof) * jtj.inverse();
                        result.residual_rms = std::sqrt(ssr / n);
                        result.iterations = iter + 1;
                        return result;
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!stepped) break;
    }

    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "lorentzian fit did not converge, residual rms %.3e",
                  std::sqrt(ssr / n));
    throw std::runtime_error(buf);
}

} // namespace

FringeFit fit_fringe(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<int>& candidates) {
    check_points(x, y, 8);
    if (candidates.empty())
        throw std::invalid_argument("need at least one candidate frequency");
    const int n = static_cast<int>(x.size());

    FringeFit best;
    double best_ssr = std::numeric_limits<double>::infinity();
    for (int freq : candidates) {
        Eigen::MatrixXd design(n, 3);
        for (int i = 0; i < n; ++i) {
            design(i, 0) = 1.0;
            design(i, 1) = std::cos(freq * x[i]);
            design(i, 2) = std::sin(freq * x[i]);
        }
        Eigen::Map<const Eigen::VectorXd> rhs(y.data(), n);
        Eigen::Vector3d beta = design.colPivHouseholderQr().solve(rhs);
        double ssr = (design * beta - rhs).squaredNorm();
        if (ssr >= best_ssr) continue;
        best_ssr = ssr;

        double offset = beta[0];
        double amp = std::hypot(beta[1], beta[2]);
        best.offset = offset;
        best.amplitude = amp;
        best.phase = std::atan2(beta[2], beta[1]);
        best.frequency = freq;
        best.residual_rms = std::sqrt(ssr / n);
        best.visibility =
            offset > 0.0 ? std::clamp(amp / offset, 0.0, 1.0) : 0.0;

        double dof = std::max(1, n - 3);
        Eigen::Matrix3d cov = (ssr / dof) *
            (design.transpose() * design).inverse();
        if (offset > 0.0) {
            Eigen::Vector3d grad;
            if (amp > 0.0)
                grad << -amp / (offset * offset), beta[1] / (amp * offset),
                    beta[2] / (amp * offset);
            else
                grad << 0.0, 1.0 / offset, 1.0 / offset;
            best.visibility_err = std::sqrt(
                std::max(0.0, double(grad.transpose() * cov * grad)));
        } else {
            best.visibility_err = 0.0;
        }
    }
    return best;
}

LorentzianFit fit_lorentzian(const std::vector<double>& x,
                             const std::vector<double>& y) {
    check_points(x, y, 8);
    LmResult lm = lm_lorentzian(x, y);
    LorentzianFit fit;
    fit.baseline = lm.params[0];
    fit.amplitude = lm.params[1];
    fit.center = lm.params[2];
    fit.fwhm = lm.params[3];
    fit.residual_rms = lm.residual_rms;
    fit.iterations = lm.iterations;
    return fit;
}

DipFit fit_dip(const std::vector<double>& x, const std::vector<double>& y) {
    check_points(x, y, 8);
    LmResult lm = lm_lorentzian(x, y);
    double baseline = lm.params[0], amp = lm.params[1];
    DipFit fit;
    fit.c_max = baseline;
    fit.c_min = baseline + amp;
    fit.center = lm.params[2];
    fit.fwhm = lm.params[3];
    fit.residual_rms = lm.residual_rms;
    fit.visibility =
        baseline > 0.0 ? std::clamp(-amp / baseline, 0.0, 1.0) : 0.0;
    if (baseline > 0.0) {
        // V = -a/b, delta method over the (b, a) block
        Eigen::Vector2d grad(amp / (baseline * baseline), -1.0 / baseline);
        Eigen::Matrix2d cov = lm.covariance.topLeftCorner<2, 2>();
        fit.visibility_err =
            std::sqrt(std::max(0.0, double(grad.transpose() * cov * grad)));
    }
    return fit;
}

} // namespace fockforge
