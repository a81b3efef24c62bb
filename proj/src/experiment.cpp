#include "fockforge/experiment.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "fockforge/curve_fit.hpp"
#include "fockforge/detection.hpp"
#include "fockforge/rng.hpp"
#include "fockforge/serialization.hpp"
#include "fockforge/tomography.hpp"

namespace fockforge {

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string format_number(double value) {
    if (std::isfinite(value) && value == std::floor(value) &&
        std::abs(value) < 9.007199254740992e15)
        return std::to_string(static_cast<long long>(value));
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, p);
}

namespace {

class OutputWriter {
  public:
    explicit OutputWriter(const std::string& dir)
        : dir_(dir.empty() ? "." : dir) {
        std::filesystem::create_directories(dir_);
    }

    // data file: recorded in the manifest
    void write(const std::string& name, const std::string& content) {
        write_raw(name, content);
        entries_.push_back(
            {name, static_cast<std::uint64_t>(content.size()),
             fnv1a64_hex(content)});
    }

    // report file: carries the manifest, so not part of it
    void write_raw(const std::string& name, const std::string& content) {
        const std::filesystem::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        out.close();
        if (!out)
            throw std::runtime_error("cannot write " + path.string());
    }

    const std::vector<FileEntry>& entries() const { return entries_; }

  private:
    std::filesystem::path dir_;
    std::vector<FileEntry> entries_;
};

std::string plot_script(const std::string& data_file, const std::string& xlabel,
                        bool log_log = false) {
    std::string s;
    s += "set datafile separator \",\"\n";
    s += "set xlabel \"" + xlabel + "\"\n";
    s += "set ylabel \"counts\"\n";
    if (log_log) s += "set logscale xy\n";
    s += "set key off\n";
    s += "plot \"" + data_file + "\" using 1:2 with linespoints pt 7\n";
    return s;
}

std::string csv_row(std::initializer_list<double> values) {
    std::string row;
    bool first = true;
    for (double v : values) {
        if (!first) row += ',';
        row += format_number(v);
        first = false;
    }
    return row + "\n";
}

bool generates_data(ExperimentKind kind) {
    return kind != ExperimentKind::brightness &&
           kind != ExperimentKind::budget;
}

// squeeze parameter implied by the pump powers against the calibration
// reference, unless the config pins r directly
double derived_r(const ExperimentConfig& c) {
    if (c.squeeze_r) return *c.squeeze_r;
    const double scale = (c.pump.p1_uw * c.pump.p2_uw) /
                         (c.reference.power_uw * c.reference.power_uw);
    const double pairs = c.reference.pairs_per_pulse * scale;
    if (pairs > 0.25)
        throw std::runtime_error(
            "pump powers imply a pair probability of " + format_number(pairs) +
            " per pulse, beyond the 1/4 maximum; lower the power or set "
            "source.r directly");
    return SqueezeParams::from_pair_probability(pairs).r;
}

DetectorModel data_detector(const ExperimentConfig& c) {
    DetectorModel model;
    model.efficiency = loss_budget_total(c.loss).stated_transmissivity;
    model.dark_click_prob =
        c.detection.dark_count_hz * c.detection.window_ns * 1e-9;
    return model;
}

// distinguishable-photon contamination: scale every coherence, keep the
// photon-number populations
DensityMatrix dephase(const FockVector& psi, double distinguishability) {
    DensityMatrix rho = from_pure(psi);
    if (distinguishability > 0.0) {
        Eigen::VectorXcd populations = rho.mat.diagonal();
        rho.mat *= (1.0 - distinguishability);
        rho.mat.diagonal() = populations;
    }
    return rho;
}

WavePlateSetting jittered(const WavePlateSetting& nominal, double sigma,
                          Rng& rng) {
    if (sigma <= 0.0) return nominal;
    const double dphi = sigma * rng.normal();
    const double dtheta = sigma * rng.normal();
    return WavePlateSetting(nominal.phi + dphi, nominal.theta + dtheta);
}

double scan_counts(double expected, bool sampled, Rng& rng) {
    if (sampled) return static_cast<double>(rng.poisson(expected));
    return expected;
}

double count_stderr(double counts, bool sampled) {
    return sampled ? std::sqrt(std::max(counts, 0.0)) : 0.0;
}

void run_budget(const ExperimentConfig& c, OutputWriter& w, RunReport& rep) {
    const LossTotals totals = loss_budget_total(c.loss);
    const std::vector<std::pair<std::string, double>> rows = {
        {"waveguide_db", c.loss.waveguide_db},
        {"coupler_db", c.loss.coupler_db},
        {"manipulation_db", c.loss.manipulation_db},
        {"filters_db", c.loss.filters_db},
        {"detector_db", c.loss.detector_db},
        {"component_sum_db", totals.component_sum_db},
        {"component_transmissivity", totals.component_transmissivity},
        {"stated_total_db", totals.stated_db},
        {"stated_transmissivity", totals.stated_transmissivity},
    };
    std::string csv = "quantity,value\n";
    for (const auto& [name, value] : rows) {
        csv += name + "," + format_number(value) + "\n";
        rep.results[name] = value;
    }
    w.write("budget.csv", csv);
}

void run_brightness(const ExperimentConfig& c, OutputWriter& w,
                    RunReport& rep) {
    const BrightnessReport b = brightness_estimate(c.pump, c.reference, c.loss);
    const double width = pulse_width_tbp(c.pulse.input_fwhm_ps,
                                         c.pulse.input_bandwidth_nm,
                                         c.pulse.filter_bandwidth_nm);
    const std::vector<std::pair<std::string, double>> rows = {
        {"pairs_per_pulse", b.pairs_per_pulse},
        {"four_photon_per_pulse", b.four_photon_per_pulse},
        {"four_photon_generated_hz", b.four_photon_generated_hz},
        {"four_fold_detected_hz", b.four_fold_detected_hz},
        {"filtered_pulse_fwhm_ps", width},
    };
    std::string csv = "quantity,value\n";
    for (const auto& [name, value] : rows) {
        csv += name + "," + format_number(value) + "\n";
        rep.results[name] = value;
    }
    w.write("brightness.csv", csv);
}

void run_delay_scan(const ExperimentConfig& c, OutputWriter& w,
                    RunReport& rep) {
    const std::vector<double> xs = c.scan.values();
    const bool sampled = rep.sampled;
    std::vector<double> ys(xs.size());
    std::string csv = "delay_ps,counts,stderr\n";
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double rate =
            c.delay_background_hz +
            (c.delay_peak_hz - c.delay_background_hz) *
                delay_overlap(xs[j], c.pump.pulse_fwhm_ps);
        Rng rng(derive_seed(c.seed, j));
        ys[j] = scan_counts(rate * c.integration_s, sampled, rng);
        csv += csv_row({xs[j], ys[j], count_stderr(ys[j], sampled)});
    }
    w.write("delay_scan.csv", csv);
    w.write("plot.gp", plot_script("delay_scan.csv", "pump delay (ps)"));
    try {
        const LorentzianFit fit = fit_lorentzian(xs, ys);
        rep.results["fit_center_ps"] = fit.center;
        rep.results["fit_fwhm_ps"] = fit.fwhm;
        rep.results["fit_baseline_counts"] = fit.baseline;
        rep.results["fit_peak_counts"] = fit.baseline + fit.amplitude;
        rep.results["fit_residual_rms"] = fit.residual_rms;
        rep.results["expected_fwhm_ps"] = c.pump.pulse_fwhm_ps;
    } catch (const std::exception& e) {
        rep.converged = false;
        rep.notes["fit_error"] = e.what();
    }
}

std::optional<double> loglog_slope(const std::vector<double>& xs,
                                   const std::vector<double>& ys, int* used) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > 0.0) || !(xs[i] > 0.0)) continue;
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    *used = n;
    if (n < 2) return std::nullopt;
    const double var = sxx - sx * sx / n;
    if (var <= 0.0) return std::nullopt;
    return (sxy - sx * sy / n) / var;
}

void run_power_scan(const ExperimentConfig& c, OutputWriter& w,
                    RunReport& rep) {
    const std::vector<double> xs = c.scan.values();
    const bool sampled = rep.sampled;
    const double eta = loss_budget_total(c.loss).stated_transmissivity;
    std::vector<double> two(xs.size()), four(xs.size());
    std::string csv2 = "power_uw,counts,stderr\n";
    std::string csv4 = "power_uw,counts,stderr\n";
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double p = xs[j];
        const double pairs = c.reference.pairs_per_pulse * (p * p) /
                             (c.reference.power_uw * c.reference.power_uw);
        const double two_rate = pairs * c.pump.rep_rate_hz * eta * eta;
        PumpConfig pump = c.pump;
        pump.p1_uw = p;
        pump.p2_uw = p;
        const double four_rate =
            brightness_estimate(pump, c.reference, c.loss)
                .four_fold_detected_hz;
        Rng rng(derive_seed(c.seed, j));
        two[j] = scan_counts(two_rate * c.integration_s, sampled, rng);
        four[j] = scan_counts(four_rate * c.integration_s, sampled, rng);
        csv2 += csv_row({p, two[j], count_stderr(two[j], sampled)});
        csv4 += csv_row({p, four[j], count_stderr(four[j], sampled)});
    }
    w.write("twofold.csv", csv2);
    w.write("fourfold.csv", csv4);
    std::string gp;
    gp += "set datafile separator \",\"\n";
    gp += "set xlabel \"pump power (uW)\"\n";
    gp += "set ylabel \"counts\"\n";
    gp += "set logscale xy\n";
    gp += "set key top left\n";
    gp += "plot \"twofold.csv\" using 1:2 with linespoints pt 7 "
          "title \"two-fold\", \\\n";
    gp += "     \"fourfold.csv\" using 1:2 with linespoints pt 5 "
          "title \"four-fold\"\n";
    w.write("plot.gp", gp);

    rep.results["transmissivity"] = eta;
    int used2 = 0, used4 = 0;
    const std::optional<double> s2 = loglog_slope(xs, two, &used2);
    const std::optional<double> s4 = loglog_slope(xs, four, &used4);
    rep.results["points_used_twofold"] = used2;
    rep.results["points_used_fourfold"] = used4;
    if (s2) rep.results["slope_twofold"] = *s2;
    if (s4) rep.results["slope_fourfold"] = *s4;
    if (!s2 || !s4) {
        rep.converged = false;
        rep.notes["fit_error"] =
            "too few nonzero points for a log-log slope; raise the "
            "integration time or the pump power";
    }
}

void run_hom(const ExperimentConfig& c, OutputWriter& w, RunReport& rep) {
    const std::vector<double> xs = c.scan.values();
    const bool sampled = rep.sampled;
    const double visibility = 1.0 - c.noise.distinguishability;
    const std::vector<double> levels =
        hom_scan(xs, visibility, c.hom_envelope_fwhm_ps);
    std::vector<double> ys(xs.size());
    std::string csv = "delay_ps,counts,stderr\n";
    for (std::size_t j = 0; j < xs.size(); ++j) {
        Rng rng(derive_seed(c.seed, j));
        ys[j] = scan_counts(c.hom_rate_hz * c.integration_s * levels[j],
                            sampled, rng);
        csv += csv_row({xs[j], ys[j], count_stderr(ys[j], sampled)});
    }
    w.write("hom.csv", csv);
    w.write("plot.gp", plot_script("hom.csv", "relative delay (ps)"));
    rep.results["true_visibility"] = visibility;
    try {
        const DipFit fit = fit_dip(xs, ys);
        rep.results["visibility"] = fit.visibility;
        rep.results["visibility_err"] = fit.visibility_err;
        rep.results["c_max"] = fit.c_max;
        rep.results["c_min"] = fit.c_min;
        rep.results["center_ps"] = fit.center;
        rep.results["fwhm_ps"] = fit.fwhm;
        rep.results["fit_residual_rms"] = fit.residual_rms;
    } catch (const std::exception& e) {
        rep.converged = false;
        rep.notes["fit_error"] = e.what();
    }
}

FockVector fringe_source(const ExperimentConfig& c, int n_photons) {
    if (n_photons == 1) {
        FockVector psi(kDefaultCutoff);
        psi.at(1, 0) = 1.0 / std::sqrt(2.0);
        psi.at(0, 1) = 1.0 / std::sqrt(2.0);
        return psi;
    }
    if (c.noise.include_higher_order)
        return squeezed_two_mode_state(SqueezeParams{derived_r(c)});
    return ideal_2n_state(n_photons / 2);
}

void run_fringe(const ExperimentConfig& c, int n_photons, OutputWriter& w,
                RunReport& rep) {
    const std::vector<double> xs = c.scan.values();
    const bool sampled = rep.sampled;
    const DensityMatrix rho =
        dephase(fringe_source(c, n_photons), c.noise.distinguishability);
    const DetectorModel det = data_detector(c);
    const DetectionTree tree{c.detection.tree_h, c.detection.tree_v};
    const double sigma =
        sampled ? c.noise.waveplate_angle_jitter_rad : 0.0;

    std::vector<double> ys(xs.size());
    std::string csv = "phi_rad,counts,stderr\n";
    for (std::size_t j = 0; j < xs.size(); ++j) {
        Rng rng(derive_seed(c.seed, j));
        const WavePlateSetting setting =
            jittered(WavePlateSetting(xs[j], c.fringe_theta), sigma, rng);
        const Eigen::MatrixXd port = port_number_distribution(rho, setting);
        const Eigen::MatrixXd classes = click_class_probs(port, tree, det);
        const double p =
            classes(c.fringe_pattern.clicks_h, c.fringe_pattern.clicks_v);
        ys[j] = scan_counts(p * c.pump.rep_rate_hz * c.integration_s, sampled,
                            rng);
        csv += csv_row({xs[j], ys[j], count_stderr(ys[j], sampled)});
    }
    w.write("fringe.csv", csv);
    w.write("plot.gp", plot_script("fringe.csv", "gadget phase (rad)"));
    rep.results["expected_frequency"] = n_photons;
    try {
        const FringeFit fit = fit_fringe(xs, ys);
        rep.results["frequency"] = fit.frequency;
        rep.results["visibility"] = fit.visibility;
        rep.results["visibility_err"] = fit.visibility_err;
        rep.results["offset"] = fit.offset;
        rep.results["amplitude"] = fit.amplitude;
        rep.results["phase"] = fit.phase;
        rep.results["fit_residual_rms"] = fit.residual_rms;
    } catch (const std::exception& e) {
        rep.converged = false;
        rep.notes["fit_error"] = e.what();
    }
}

void run_tomo(const ExperimentConfig& c, int n_photons, bool fock_pair,
              OutputWriter& w, RunReport& rep) {
    const SettingsDesign design = default_settings(n_photons);
    const SqueezeParams params{derived_r(c)};
    FockVector src = fock_pair ? single_pump_pair_state(params)
                               : squeezed_two_mode_state(params);
    if (!c.noise.include_higher_order)
        src = post_select_total(src, n_photons);
    const DensityMatrix rho_src = dephase(src, c.noise.distinguishability);
    const DetectorModel det = data_detector(c);
    const DetectionTree tree{c.detection.tree_h, c.detection.tree_v};
    const TomoScheme scheme{n_photons, OutcomeKind::clicks, tree};
    const bool sampled = rep.sampled;
    const double sigma =
        sampled ? c.noise.waveplate_angle_jitter_rad : 0.0;

    std::vector<CountRecord> records;
    std::string csv = "setting_index,phi_rad,theta_rad,outcome,counts,"
                      "integration_s\n";
    for (std::size_t i = 0; i < design.settings.size(); ++i) {
        const WavePlateSetting& nominal = design.settings[i];
        Rng rng(derive_seed(c.seed, i));
        const WavePlateSetting actual = jittered(nominal, sigma, rng);
        const Eigen::MatrixXd port = port_number_distribution(rho_src, actual);
        const Eigen::MatrixXd classes = click_class_probs(port, tree, det);
        const int ch_lo = std::max(0, n_photons - tree.detectors_v);
        const int ch_hi = std::min(n_photons, tree.detectors_h);
        for (int ch = ch_lo; ch <= ch_hi; ++ch) {
            const int cv = n_photons - ch;
            const double expected = classes(ch, cv) * c.pump.rep_rate_hz *
                                    c.integration_s;
            const std::int64_t counts =
                sampled ? rng.poisson(expected) : std::llround(expected);
            records.push_back({static_cast<int>(i), nominal,
                               click_label(ch, cv), counts, c.integration_s});
            csv += std::to_string(i) + "," + format_number(nominal.phi) +
                   "," + format_number(nominal.theta) + "," +
                   click_label(ch, cv) + "," + std::to_string(counts) + "," +
                   format_number(c.integration_s) + "\n";
        }
    }
    w.write("counts.csv", csv);
    rep.results["condition_number"] = design.condition_number;
    rep.results["n_settings"] = static_cast<double>(design.settings.size());

    const FockVector target =
        fock_pair ? number_state(2, 2) : ideal_2n_state(n_photons / 2);
    try {
        const ReconstructionResult res = mle_reconstruct(records, scheme);
        if (!res.converged) {
            rep.converged = false;
            rep.notes["mle"] = "hit the iteration cap before converging";
        }
        rep.results["fidelity"] = sector_fidelity(
            res.rho_sector, sector_amplitudes(target, n_photons));
        rep.results["log_likelihood"] = res.log_likelihood;
        rep.results["mle_iterations"] = res.iterations;
        rep.results["flux_per_s"] = res.flux;
        w.write("rho.json", density_to_json(res.rho));

        if (c.resamples >= 2) {
            const FidelityEstimate est = fidelity_with_errorbars(
                records, scheme, target, c.resamples,
                derive_seed(c.seed, 0x626f6f74ULL));
            rep.results["fidelity_mean"] = est.fidelity;
            rep.results["fidelity_std"] = est.std_dev;
            rep.results["bootstrap_resamples"] = est.resamples;
            rep.results["bootstrap_failures"] = est.failures;
        }
    } catch (const std::exception& e) {
        rep.converged = false;
        rep.notes["reconstruction_error"] = e.what();
    }
}

} // namespace

RunReport run_experiment(const ExperimentConfig& c) {
    RunReport rep;
    rep.kind = kind_name(c.kind);
    rep.sampled =
        generates_data(c.kind) && c.statistics == Statistics::poisson;
    rep.seed = c.seed;
    rep.config_echo = c.echo;
    OutputWriter writer(c.output_dir);

    switch (c.kind) {
        case ExperimentKind::budget: run_budget(c, writer, rep); break;
        case ExperimentKind::brightness:
            run_brightness(c, writer, rep);
            break;
        case ExperimentKind::delay_scan:
            run_delay_scan(c, writer, rep);
            break;
        case ExperimentKind::power_scan:
            run_power_scan(c, writer, rep);
            break;
        case ExperimentKind::hom: run_hom(c, writer, rep); break;
        case ExperimentKind::fringe1: run_fringe(c, 1, writer, rep); break;
        case ExperimentKind::fringe2: run_fringe(c, 2, writer, rep); break;
        case ExperimentKind::fringe4: run_fringe(c, 4, writer, rep); break;
        case ExperimentKind::tomo2:
            run_tomo(c, 2, false, writer, rep);
            break;
        case ExperimentKind::tomo4:
            run_tomo(c, 4, false, writer, rep);
            break;
        case ExperimentKind::tomo_fock:
            run_tomo(c, 4, true, writer, rep);
            break;
    }

    rep.files = writer.entries();
    writer.write_raw("report.json", report_to_json(rep));
    writer.write_raw("report.txt", report_to_text(rep));
    return rep;
}

std::string report_to_json(const RunReport& rep) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["kind"] = rep.kind;
    j["sampled"] = rep.sampled;
    if (rep.sampled) j["seed"] = rep.seed;
    j["converged"] = rep.converged;
    j["results"] = rep.results;
    if (!rep.notes.empty()) j["notes"] = rep.notes;
    nlohmann::json files = nlohmann::json::array();
    for (const FileEntry& f : rep.files)
        files.push_back({{"name", f.name},
                         {"bytes", f.bytes},
                         {"fnv1a64", f.fnv1a64}});
    j["files"] = files;
    j["config"] = rep.config_echo;
    return j.dump(2) + "\n";
}

std::string report_to_text(const RunReport& rep) {
    std::string out;
    out += std::string("fockforge ") + kVersion + "\n";
    out += "kind: " + rep.kind + "\n";
    if (rep.sampled) {
        out += "statistics: poisson (seed " + std::to_string(rep.seed) +
               ")\n";
    } else {
        out += "statistics: expected values\n";
    }
    out += std::string("converged: ") + (rep.converged ? "yes" : "NO") + "\n";
    out += "\nresults:\n";
    for (const auto& [name, value] : rep.results)
        out += "  " + name + " = " + format_number(value) + "\n";
    if (!rep.notes.empty()) {
        out += "\nnotes:\n";
        for (const auto& [name, text] : rep.notes)
            out += "  " + name + ": " + text + "\n";
    }
    out += "\nfiles:\n";
    for (const FileEntry& f : rep.files)
        out += "  " + f.name + "  " + std::to_string(f.bytes) +
               " bytes  fnv1a64 " + f.fnv1a64 + "\n";
    out += "\nconfig:\n";
    for (const auto& [key, value] : rep.config_echo)
        out += "  " + key + " = " + value + "\n";
    return out;
}

} // namespace fockforge
