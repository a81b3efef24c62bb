#include "fockforge/tomography.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

#include "fockforge/rng.hpp"

namespace fockforge {

namespace {

void check_scheme(const TomoScheme& scheme) {
    if (scheme.n_photons < 1)
        throw std::invalid_argument("tomography: n_photons must be at least 1");
    if (scheme.kind == OutcomeKind::clicks &&
        (scheme.tree.detectors_h < 1 || scheme.tree.detectors_v < 1))
        throw std::invalid_argument(
            "tomography: click scheme needs at least one detector per port");
}

// Orthonormal Hermitian basis under tr(A B): diagonal units, then
// symmetric and antisymmetric pairs scaled by 1/sqrt(2).
std::vector<Eigen::MatrixXcd> hermitian_basis(int dim) {
    std::vector<Eigen::MatrixXcd> basis;
    basis.reserve(static_cast<std::size_t>(dim) * dim);
    for (int a = 0; a < dim; ++a) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(dim, dim);
        e(a, a) = 1.0;
        basis.push_back(std::move(e));
    }
    const double s = 1.0 / std::sqrt(2.0);
    for (int a = 0; a < dim; ++a) {
        for (int b = a + 1; b < dim; ++b) {
            Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(dim, dim);
            e(a, b) = s;
            e(b, a) = s;
            basis.push_back(std::move(e));
            Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(dim, dim);
            f(a, b) = std::complex<double>(0.0, s);
            f(b, a) = std::complex<double>(0.0, -s);
            basis.push_back(std::move(f));
        }
    }
    return basis;
}

// Rows: every (setting, outcome) pair; columns: Hermitian basis coordinates.
Eigen::MatrixXd forward_matrix(const std::vector<WavePlateSetting>& settings,
                               const TomoScheme& scheme) {
    const int dim = scheme.n_photons + 1;
    const auto basis = hermitian_basis(dim);
    std::vector<std::vector<Outcome>> all;
    all.reserve(settings.size());
    Eigen::Index rows = 0;
    for (const auto& s : settings) {
        all.push_back(setting_outcomes(s, scheme));
        rows += static_cast<Eigen::Index>(all.back().size());
    }
    Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(basis.size()));
    Eigen::Index row = 0;
    for (const auto& outcomes : all) {
        for (const auto& o : outcomes) {
            for (std::size_t p = 0; p < basis.size(); ++p)
                a(row, static_cast<Eigen::Index>(p)) =
                    (o.effect * basis[p]).trace().real();
            ++row;
        }
    }
    return a;
}

double condition_of(const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= sv(0) * 1e-15)
        return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FOCKFORGE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && v < 1024) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Records flattened for the likelihood: one effect per record, plus totals.
struct MleData {
    int dim = 0;
    std::vector<Eigen::MatrixXcd> effects;
    std::vector<double> counts;
    std::vector<double> integration;
    double total = 0.0;
};

MleData ingest(const std::vector<CountRecord>& records,
               const TomoScheme& scheme) {
    check_scheme(scheme);
    if (records.empty())
        throw std::invalid_argument("tomography: no count records");
    MleData data;
    data.dim = scheme.n_photons + 1;
    std::map<int, WavePlateSetting> angles;
    std::map<int, std::vector<Outcome>> outcome_cache;
    std::set<std::pair<int, std::string>> seen;
    for (const auto& r : records) {
        if (r.counts < 0)
            throw std::invalid_argument("tomography: negative counts at setting " +
                                        std::to_string(r.setting_index));
        if (!(r.integration_s > 0.0))
            throw std::invalid_argument(
                "tomography: integration time must be positive at setting " +
                std::to_string(r.setting_index));
        auto it = outcome_cache.find(r.setting_index);
        if (it == outcome_cache.end()) {
            it = outcome_cache.emplace(r.setting_index,
                                       setting_outcomes(r.setting, scheme))
                     .first;
            angles.emplace(r.setting_index, r.setting);
        } else {
            const auto& first = angles.at(r.setting_index);
            if (std::abs(first.phi - r.setting.phi) > 1e-12 ||
                std::abs(first.theta - r.setting.theta) > 1e-12)
                throw std::invalid_argument(
                    "tomography: records disagree about the angles of setting " +
                    std::to_string(r.setting_index));
        }
        if (!seen.insert({r.setting_index, r.outcome}).second)
            throw std::invalid_argument("tomography: duplicate record for setting " +
                                        std::to_string(r.setting_index) +
                                        " outcome " + r.outcome);
        const Outcome* found = nullptr;
        for (const auto& o : it->second) {
            if (o.label == r.outcome) {
                found = &o;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("tomography: unknown outcome label '" +
                                        r.outcome + "' at setting " +
                                        std::to_string(r.setting_index));
        data.effects.push_back(found->effect);
        data.counts.push_back(static_cast<double>(r.counts));
        data.integration.push_back(r.integration_s);
        data.total += static_cast<double>(r.counts);
    }
    return data;
}

// Reduced objective sum_i n_i log p_i - N log(sum_i t_i p_i); differs from
// the profiled Poisson log-likelihood by a data-only constant. Fills probs
// and the flux denominator; -inf when the state kills an observed outcome.
double reduced_loglike(const MleData& data, const Eigen::MatrixXcd& rho,
                       std::vector<double>& probs, double& denom) {
    const std::size_t m = data.effects.size();
    probs.resize(m);
    denom = 0.0;
    double ll = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double p = (data.effects[i] * rho).trace().real();
        if (p < 0.0) p = 0.0;
        probs[i] = p;
        denom += data.integration[i] * p;
        if (data.counts[i] > 0.0) {
            if (p <= 0.0) return -std::numeric_limits<double>::infinity();
            ll += data.counts[i] * std::log(p);
        }
    }
    if (denom <= 0.0) return -std::numeric_limits<double>::infinity();
    ll -= data.total * std::log(denom);
    return ll;
}

} // namespace

std::string port_label(int photons_h, int photons_v) {
    if (photons_h < 0 || photons_v < 0)
        throw std::invalid_argument("port_label: negative photon number");
    return "n" + std::to_string(photons_h) + "m" + std::to_string(photons_v);
}

std::string click_label(int clicks_h, int clicks_v) {
    if (clicks_h < 0 || clicks_v < 0)
        throw std::invalid_argument("click_label: negative click count");
    return "c" + std::to_string(clicks_h) + "x" + std::to_string(clicks_v);
}

std::vector<Outcome> setting_outcomes(const WavePlateSetting& setting,
                                      const TomoScheme& scheme) {
    check_scheme(scheme);
    const int n = scheme.n_photons;
    const Eigen::MatrixXcd m = sector_unitary(su2_from_angles(setting), n);
    std::vector<Outcome> out;
    if (scheme.kind == OutcomeKind::port_numbers) {
        out.reserve(static_cast<std::size_t>(n) + 1);
        for (int s = 0; s <= n; ++s)
            out.push_back({port_label(n - s, s), m.row(s).adjoint() * m.row(s)});
        return out;
    }
    // Click classes with total clicks = n: the post-selected n-fold events.
    // Weight of class (ch, cv) given port occupation (k, n - k) factorizes
    // over the two ideal fan-outs.
    const DetectorModel ideal;
    std::vector<Eigen::VectorXd> fan_h(static_cast<std::size_t>(n) + 1);
    std::vector<Eigen::VectorXd> fan_v(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        fan_h[static_cast<std::size_t>(k)] =
            fanout_click_probs(k, scheme.tree.detectors_h, ideal);
        fan_v[static_cast<std::size_t>(k)] =
            fanout_click_probs(k, scheme.tree.detectors_v, ideal);
    }
    for (int ch = std::max(0, n - scheme.tree.detectors_v);
         ch <= std::min(n, scheme.tree.detectors_h); ++ch) {
        const int cv = n - ch;
        Eigen::MatrixXcd effect = Eigen::MatrixXcd::Zero(n + 1, n + 1);
        for (int s = 0; s <= n; ++s) {
            const int k = n - s;
            const double w = fan_h[static_cast<std::size_t>(k)](ch) *
                             fan_v[static_cast<std::size_t>(s)](cv);
            if (w == 0.0) continue;
            effect.noalias() += w * (m.row(s).adjoint() * m.row(s));
        }
        out.push_back({click_label(ch, cv), std::move(effect)});
    }
    return out;
}

SettingsDesign default_settings(int n_photons) {
    if (n_photons < 1)
        throw std::invalid_argument("default_settings: n_photons must be at least 1");
    const int d = n_photons + 1;
    const double pi = std::acos(-1.0);
    TomoScheme probe{n_photons, OutcomeKind::port_numbers, DetectionTree{1, 1}};
    auto build = [&](double (*theta_of)(int, int)) {
        std::vector<WavePlateSetting> settings;
        settings.reserve(static_cast<std::size_t>(d) * d);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                settings.emplace_back(2.0 * pi * j / d, theta_of(k, d));
        return settings;
    };
    auto ladder_a = [](int k, int d_) {
        return (k + 1) * std::acos(-1.0) / (2.0 * (d_ + 1));
    };
    auto ladder_b = [](int k, int d_) {
        return (2 * k + 1) * std::acos(-1.0) / (4.0 * d_);
    };
    SettingsDesign best;
    best.condition_number = std::numeric_limits<double>::infinity();
    for (auto* ladder : {+ladder_a, +ladder_b}) {
        auto settings = build(ladder);
        const double cond = condition_of(forward_matrix(settings, probe));
        if (cond < best.condition_number) {
            best.settings = std::move(settings);
            best.condition_number = cond;
        }
    }
    if (!std::isfinite(best.condition_number))
        throw std::runtime_error(
            "default_settings: neither theta ladder spans the sector");
    return best;
}

Eigen::VectorXcd sector_amplitudes(const FockVector& psi, int n_photons) {
    if (n_photons < 0)
        throw std::invalid_argument("sector_amplitudes: negative photon number");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(n_photons + 1);
    for (int s = 0; s <= n_photons; ++s) {
        const int h = n_photons - s;
        if (h <= psi.cutoff && s <= psi.cutoff) amps(s) = psi.at(h, s);
    }
    return amps;
}

double sector_fidelity(const Eigen::MatrixXcd& rho_sector,
                       const Eigen::VectorXcd& target_amps) {
    if (rho_sector.rows() != rho_sector.cols() ||
        rho_sector.rows() != target_amps.size())
        throw std::invalid_argument("sector_fidelity: dimension mismatch");
    const double norm2 = target_amps.squaredNorm();
    if (norm2 <= 0.0)
        throw std::invalid_argument(
            "sector_fidelity: target has no support on this sector");
    const std::complex<double> v =
        (target_amps.adjoint() * rho_sector * target_amps).value();
    return v.real() / norm2;
}

DensityMatrix embed_sector(const Eigen::MatrixXcd& rho_sector, int n_photons) {
    const int d = n_photons + 1;
    if (rho_sector.rows() != d || rho_sector.cols() != d)
        throw std::invalid_argument("embed_sector: matrix does not match sector");
    DensityMatrix rho(n_photons);
    for (int sp = 0; sp < d; ++sp)
        for (int s = 0; s < d; ++s)
            rho.mat(rho.index(n_photons - sp, sp), rho.index(n_photons - s, s)) =
                rho_sector(sp, s);
    return rho;
}

std::vector<double> forward_probs(const Eigen::MatrixXcd& rho_sector,
                                  const WavePlateSetting& setting,
                                  const TomoScheme& scheme) {
    check_scheme(scheme);
    const int d = scheme.n_photons + 1;
    if (rho_sector.rows() != d || rho_sector.cols() != d)
        throw std::invalid_argument("forward_probs: rho does not match sector");
    const auto outcomes = setting_outcomes(setting, scheme);
    std::vector<double> probs;
    probs.reserve(outcomes.size());
    for (const auto& o : outcomes)
        probs.push_back(std::max(0.0, (o.effect * rho_sector).trace().real()));
    return probs;
}

Eigen::MatrixXcd linear_inversion(const std::vector<CountRecord>& records,
                                  const TomoScheme& scheme) {
    check_scheme(scheme);
    if (scheme.kind != OutcomeKind::port_numbers)
        throw std::invalid_argument(
            "linear_inversion: needs the complete port-number outcome set; "
            "click classes are not self-normalizing");
    if (records.empty())
        throw std::invalid_argument("tomography: no count records");
    const int d = scheme.n_photons + 1;

    struct Group {
        WavePlateSetting setting{0.0, 0.0};
        std::map<std::string, std::int64_t> counts;
    };
    std::map<int, Group> groups;
    for (const auto& r : records) {
        if (r.counts < 0)
            throw std::invalid_argument("tomography: negative counts at setting " +
                                        std::to_string(r.setting_index));
        auto [it, inserted] = groups.try_emplace(r.setting_index);
        if (inserted) {
            it->second.setting = r.setting;
        } else if (std::abs(it->second.setting.phi - r.setting.phi) > 1e-12 ||
                   std::abs(it->second.setting.theta - r.setting.theta) > 1e-12) {
            throw std::invalid_argument(
                "tomography: records disagree about the angles of setting " +
                std::to_string(r.setting_index));
        }
        if (!it->second.counts.emplace(r.outcome, r.counts).second)
            throw std::invalid_argument("tomography: duplicate record for setting " +
                                        std::to_string(r.setting_index) +
                                        " outcome " + r.outcome);
    }

    const auto basis = hermitian_basis(d);
    const Eigen::Index cols = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(groups.size()) * d, cols);
    Eigen::VectorXd b(a.rows());
    Eigen::Index row = 0;
    for (const auto& [index, group] : groups) {
        const auto outcomes = setting_outcomes(group.setting, scheme);
        if (group.counts.size() != outcomes.size())
            throw std::invalid_argument(
                "linear_inversion: setting " + std::to_string(index) + " has " +
                std::to_string(group.counts.size()) + " outcomes, expected " +
                std::to_string(outcomes.size()));
        double total = 0.0;
        for (const auto& o : outcomes) {
            auto it = group.counts.find(o.label);
            if (it == group.counts.end())
                throw std::invalid_argument("linear_inversion: setting " +
                                            std::to_string(index) +
                                            " is missing outcome " + o.label);
            total += static_cast<double>(it->second);
        }
        if (total <= 0.0)
            throw std::invalid_argument("linear_inversion: setting " +
                                        std::to_string(index) + " has no counts");
        for (const auto& o : outcomes) {
            for (Eigen::Index p = 0; p < cols; ++p)
                a(row, p) = (o.effect * basis[static_cast<std::size_t>(p)])
                                .trace()
                                .real();
            b(row) = static_cast<double>(group.counts.at(o.label)) / total;
            ++row;
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > sv(0) * 1e-10) ++rank;
    if (rank < cols)
        throw std::runtime_error(
            "linear_inversion: measurement matrix rank " + std::to_string(rank) +
            " of " + std::to_string(cols) +
            "; settings are not informationally complete");
    const Eigen::VectorXd x = svd.solve(b);

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index p = 0; p < cols; ++p)
        rho += x(p) * basis[static_cast<std::size_t>(p)];
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    const double trace = rho.trace().real();
    if (std::abs(trace) < 1e-12)
        throw std::runtime_error("linear_inversion: reconstructed trace is zero");
    rho /= trace;
    return rho;
}

ReconstructionResult mle_reconstruct(const std::vector<CountRecord>& records,
                                     const TomoScheme& scheme,
                                     const TomoOptions& options) {
    const MleData data = ingest(records, scheme);
    if (data.total <= 0.0)
        throw std::invalid_argument("mle_reconstruct: all counts are zero");
    if (options.max_iterations < 1)
        throw std::invalid_argument("mle_reconstruct: max_iterations must be >= 1");
    const int d = data.dim;

    // Data-only shift from the reduced objective to the profiled Poisson
    // log-likelihood (count factorials dropped).
    double shift = data.total * std::log(data.total) - data.total;
    for (std::size_t i = 0; i < data.counts.size(); ++i)
        if (data.counts[i] > 0.0)
            shift += data.counts[i] * std::log(data.integration[i]);

    Eigen::MatrixXcd t_mat =
        Eigen::MatrixXcd::Identity(d, d) / std::sqrt(static_cast<double>(d));
    auto rho_of = [](const Eigen::MatrixXcd& t) {
        Eigen::MatrixXcd g = t.adjoint() * t;
        return (g / g.trace().real()).eval();
    };
    Eigen::MatrixXcd rho = rho_of(t_mat);

    std::vector<double> probs;
    double denom = 0.0;
    double ll = reduced_loglike(data, rho, probs, denom);

    ReconstructionResult result;
    result.converged = false;
    result.iterations = 0;
    if (options.record_trace) result.likelihood_trace.push_back(ll + shift);

    std::vector<double> trial_probs;
    double step = 1.0;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        // Ascent direction: gradient of the objective in T, restricted to
        // lower-triangular T with a real diagonal.
        Eigen::MatrixXcd r_mat = Eigen::MatrixXcd::Zero(d, d);
        for (std::size_t i = 0; i < data.effects.size(); ++i) {
            if (data.counts[i] > 0.0)
                r_mat.noalias() += (data.counts[i] / probs[i]) * data.effects[i];
            r_mat.noalias() -=
                (data.total / denom) * data.integration[i] * data.effects[i];
        }
        const double r_expect = (r_mat * rho).trace().real();
        Eigen::MatrixXcd k_mat = r_mat;
        k_mat.diagonal().array() -= r_expect;
        const double tau = t_mat.squaredNorm();
        Eigen::MatrixXcd grad = (t_mat * k_mat) / tau;
        for (int a = 0; a < d; ++a) {
            grad(a, a) = grad(a, a).real();
            for (int b = a + 1; b < d; ++b) grad(a, b) = 0.0;
        }
        if (grad.squaredNorm() == 0.0) {
            result.converged = true;
            break;
        }

        bool accepted = false;
        double trial_ll = 0.0;
        double trial_denom = 0.0;
        Eigen::MatrixXcd trial_rho;
        Eigen::MatrixXcd trial_t;
        while (step > 1e-18) {
            trial_t = t_mat + step * grad;
            const double tau_trial = trial_t.squaredNorm();
            if (tau_trial > 0.0) {
                trial_rho = rho_of(trial_t);
                trial_ll = reduced_loglike(data, trial_rho, trial_probs, trial_denom);
                if (std::isfinite(trial_ll) && trial_ll > ll) {
                    accepted = true;
                    break;
                }
            }
            step /= 2.0;
        }
        if (!accepted) {
            // No improvement along the gradient at machine precision.
            result.converged = true;
            break;
        }
        assert(trial_ll >= ll);
        const double delta = trial_ll - ll;
        t_mat = trial_t / std::sqrt(trial_t.squaredNorm());
        rho = std::move(trial_rho);
        probs.swap(trial_probs);
        denom = trial_denom;
        ll = trial_ll;
        step *= 2.0;
        result.iterations = iter;
        if (options.record_trace) result.likelihood_trace.push_back(ll + shift);
        if (delta <= options.tolerance * (1.0 + std::abs(ll + shift))) {
            result.converged = true;
            break;
        }
    }

    result.rho_sector = ((rho + rho.adjoint()) / 2.0).eval();
    result.rho = embed_sector(result.rho_sector, scheme.n_photons);
    result.log_likelihood = ll + shift;
    result.flux = data.total / denom;
    return result;
}

FidelityEstimate fidelity_with_errorbars(
    const std::vector<CountRecord>& records, const TomoScheme& scheme,
    const FockVector& target, int resamples, std::uint64_t seed,
    const TomoOptions& options, int threads) {
    if (resamples < 2)
        throw std::invalid_argument(
            "fidelity_with_errorbars: needs at least 2 resamples");
    const Eigen::VectorXcd target_amps =
        sector_amplitudes(target, scheme.n_photons);
    if (target_amps.squaredNorm() <= 0.0)
        throw std::invalid_argument(
            "fidelity_with_errorbars: target has no " +
            std::to_string(scheme.n_photons) + "-photon component");

    TomoOptions boot_options = options;
    boot_options.record_trace = false;

    std::vector<double> fidelities(static_cast<std::size_t>(resamples),
                                   std::numeric_limits<double>::quiet_NaN());
    std::vector<char> ok(static_cast<std::size_t>(resamples), 0);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int b = next.fetch_add(1);
            if (b >= resamples) return;
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
            std::vector<CountRecord> boot = records;
            for (auto& r : boot)
                r.counts = rng.poisson(static_cast<double>(r.counts));
            try {
                const auto res = mle_reconstruct(boot, scheme, boot_options);
                if (res.converged) {
                    fidelities[static_cast<std::size_t>(b)] =
                        sector_fidelity(res.rho_sector, target_amps);
                    ok[static_cast<std::size_t>(b)] = 1;
                }
            } catch (const std::exception&) {
                // counted as a failure below
            }
        }
    };

    const int n_threads = std::min(resolve_threads(threads), resamples);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    FidelityEstimate est;
    est.resamples = resamples;
    double sum = 0.0;
    int good = 0;
    for (int b = 0; b < resamples; ++b) {
        if (ok[static_cast<std::size_t>(b)]) {
            sum += fidelities[static_cast<std::size_t>(b)];
            ++good;
        }
    }
    est.failures = resamples - good;
    if (good == 0)
        throw std::runtime_error(
            "fidelity_with_errorbars: no resample converged");
    est.fidelity = sum / good;
    double ss = 0.0;
    for (int b = 0; b < resamples; ++b) {
        if (ok[static_cast<std::size_t>(b)]) {
            const double dfid = fidelities[static_cast<std::size_t>(b)] - est.fidelity;
            ss += dfid * dfid;
        }
    }
    est.std_dev = good > 1 ? std::sqrt(ss / (good - 1)) : 0.0;
    return est;
}

} // namespace fockforge
