#include "fockforge/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

namespace fockforge {

namespace {

constexpr double kPi = std::numbers::pi;

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i) out += '\n';
        out += issues[i];
    }
    return out;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> issues_)
    : std::runtime_error(join_issues(issues_)), issues(std::move(issues_)) {}

const std::vector<std::pair<ExperimentKind, std::string>>& experiment_kinds() {
    static const std::vector<std::pair<ExperimentKind, std::string>> kinds = {
        {ExperimentKind::delay_scan, "delay_scan"},
        {ExperimentKind::power_scan, "power_scan"},
        {ExperimentKind::hom, "hom"},
        {ExperimentKind::fringe1, "fringe1"},
        {ExperimentKind::fringe2, "fringe2"},
        {ExperimentKind::fringe4, "fringe4"},
        {ExperimentKind::tomo2, "tomo2"},
        {ExperimentKind::tomo4, "tomo4"},
        {ExperimentKind::tomo_fock, "tomo_fock"},
        {ExperimentKind::brightness, "brightness"},
        {ExperimentKind::budget, "budget"},
    };
    return kinds;
}

std::string kind_name(ExperimentKind kind) {
    for (const auto& [k, name] : experiment_kinds())
        if (k == kind) return name;
    return "?";
}

std::optional<ExperimentKind> kind_from_name(const std::string& name) {
    for (const auto& [k, n] : experiment_kinds())
        if (n == name) return k;
    return std::nullopt;
}

std::vector<double> ScanGrid::values() const {
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        out[static_cast<std::size_t>(i)] =
            start + (stop - start) * i / (points - 1);
    return out;
}

double angle_to_radians(const toml::Value& value) {
    using Kind = toml::Value::Kind;
    if (value.kind == Kind::integer || value.kind == Kind::floating)
        return value.as_number();
    if (value.kind != Kind::string)
        throw std::invalid_argument("expected a number or \"<value> deg|rad\"");
    const std::string& s = value.str;
    double number = 0.0;
    std::size_t begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos)
        throw std::invalid_argument("empty angle string");
    const char* first = s.data() + begin;
    if (*first == '+') ++first;
    auto [p, ec] = std::from_chars(first, s.data() + s.size(), number);
    if (ec != std::errc() || p == first)
        throw std::invalid_argument("cannot parse angle '" + s + "'");
    std::string unit(p, s.data() + s.size());
    std::size_t u0 = unit.find_first_not_of(" \t");
    std::size_t u1 = unit.find_last_not_of(" \t");
    unit = u0 == std::string::npos ? "" : unit.substr(u0, u1 - u0 + 1);
    if (unit == "deg" || unit == "degrees") return number * kPi / 180.0;
    if (unit == "rad" || unit == "radians") return number;
    throw std::invalid_argument("unknown angle unit '" + unit + "' in '" + s +
                                "'");
}

namespace {

using toml::Value;
using Apply = std::function<std::optional<std::string>(const Value&)>;

bool is_number(const Value& v) {
    return v.kind == Value::Kind::integer || v.kind == Value::Kind::floating;
}

std::string format_bound(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
}

Apply take_number(double* dst, double lo, double hi) {
    return [dst, lo, hi](const Value& v) -> std::optional<std::string> {
        if (!is_number(v)) return "expected a number";
        double d = v.as_number();
        if (!std::isfinite(d) || d < lo || d > hi)
            return "must be in [" + format_bound(lo) + ", " +
                   format_bound(hi) + "]";
        *dst = d;
        return std::nullopt;
    };
}

Apply take_positive(double* dst) {
    return [dst](const Value& v) -> std::optional<std::string> {
        if (!is_number(v)) return "expected a number";
        double d = v.as_number();
        if (!std::isfinite(d) || d <= 0.0) return "must be > 0";
        *dst = d;
        return std::nullopt;
    };
}

Apply take_finite(double* dst) {
    return [dst](const Value& v) -> std::optional<std::string> {
        if (!is_number(v)) return "expected a number";
        double d = v.as_number();
        if (!std::isfinite(d)) return "must be finite";
        *dst = d;
        return std::nullopt;
    };
}

Apply take_int(int* dst, int lo, int hi) {
    return [dst, lo, hi](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::integer) return "expected an integer";
        if (v.integer < lo || v.integer > hi)
            return "must be an integer in [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]";
        *dst = static_cast<int>(v.integer);
        return std::nullopt;
    };
}

Apply take_seed(std::uint64_t* dst) {
    return [dst](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::integer || v.integer < 0)
            return "expected a non-negative integer";
        *dst = static_cast<std::uint64_t>(v.integer);
        return std::nullopt;
    };
}

Apply take_bool(bool* dst) {
    return [dst](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::boolean) return "expected true or false";
        *dst = v.boolean;
        return std::nullopt;
    };
}

Apply take_string(std::string* dst) {
    return [dst](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::string) return "expected a string";
        *dst = v.str;
        return std::nullopt;
    };
}

Apply take_angle(double* dst, double lo, double hi) {
    return [dst, lo, hi](const Value& v) -> std::optional<std::string> {
        double rad = 0.0;
        try {
            rad = angle_to_radians(v);
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        if (!std::isfinite(rad) || rad < lo || rad > hi)
            return "must be an angle in [" + format_bound(lo) + ", " +
                   format_bound(hi) + "] rad";
        *dst = rad;
        return std::nullopt;
    };
}

struct FieldSpec {
    std::string key;
    bool required = false;
    Apply apply;
};

class Schema {
  public:
    void field(const std::string& key, Apply apply, bool required = false) {
        fields_.push_back({key, required, std::move(apply)});
    }

    std::vector<std::string> run(const toml::Table& table) const {
        std::vector<std::string> issues;
        std::set<std::string> claimed;
        for (const FieldSpec& spec : fields_) {
            const Value* v = table.find(spec.key);
            if (!v) {
                if (spec.required)
                    issues.push_back("missing required key '" + spec.key +
                                     "'");
                continue;
            }
            claimed.insert(spec.key);
            if (auto err = spec.apply(*v))
                issues.push_back("'" + spec.key + "': " + *err + " (line " +
                                 std::to_string(v->line) + ")");
        }
        for (const auto& [key, value] : table.values)
            if (!claimed.count(key))
                issues.push_back("unknown key '" + key + "' (line " +
                                 std::to_string(value.line) + ")");
        return issues;
    }

  private:
    std::vector<FieldSpec> fields_;
};

bool is_scan_kind(ExperimentKind kind) {
    return kind == ExperimentKind::delay_scan ||
           kind == ExperimentKind::power_scan || kind == ExperimentKind::hom ||
           kind == ExperimentKind::fringe1 ||
           kind == ExperimentKind::fringe2 || kind == ExperimentKind::fringe4;
}

bool is_fringe_kind(ExperimentKind kind) {
    return kind == ExperimentKind::fringe1 ||
           kind == ExperimentKind::fringe2 || kind == ExperimentKind::fringe4;
}

bool is_tomo_kind(ExperimentKind kind) {
    return kind == ExperimentKind::tomo2 || kind == ExperimentKind::tomo4 ||
           kind == ExperimentKind::tomo_fock;
}

bool generates_data(ExperimentKind kind) {
    return kind != ExperimentKind::brightness && kind != ExperimentKind::budget;
}

void apply_kind_defaults(ExperimentConfig& c) {
    switch (c.kind) {
        case ExperimentKind::fringe1:
            c.detection = {1, 1, 0.0, 1.0};
            c.fringe_pattern = {1, 0};
            c.fringe_theta = kPi / 4.0;
            break;
        case ExperimentKind::fringe2:
            c.detection = {1, 1, 0.0, 1.0};
            c.fringe_pattern = {1, 1};
            c.fringe_theta = kPi / 4.0;
            break;
        case ExperimentKind::fringe4:
            c.detection = {1, 3, 0.0, 1.0};
            c.fringe_pattern = {1, 3};
            c.fringe_theta = kPi / 4.0;
            break;
        case ExperimentKind::tomo2:
            c.detection = {2, 2, 0.0, 1.0};
            break;
        case ExperimentKind::tomo4:
        case ExperimentKind::tomo_fock:
            c.detection = {3, 3, 0.0, 1.0};
            break;
        default: break;
    }
}

} // namespace

ExperimentConfig config_from_table(const toml::Table& table) {
    ExperimentConfig c;
    for (const auto& [key, value] : table.values)
        c.echo[key] = value.render();

    const Value* kind_value = table.find("kind");
    if (!kind_value || kind_value->kind != Value::Kind::string)
        throw ConfigError({"missing required key 'kind' (a string)"});
    auto kind = kind_from_name(kind_value->str);
    if (!kind) {
        std::string names;
        for (const auto& [k, n] : experiment_kinds()) {
            if (!names.empty()) names += ", ";
            names += n;
        }
        throw ConfigError({"'kind': unknown experiment '" + kind_value->str +
                           "' (expected one of " + names + ")"});
    }
    c.kind = *kind;
    apply_kind_defaults(c);

    std::string kind_text;
    double squeeze_r_value = -1.0;
    bool seed_given = table.has("seed");

    Schema schema;
    schema.field("kind", take_string(&kind_text), true);
    schema.field("output", take_string(&c.output_dir));

    if (generates_data(c.kind)) {
        schema.field("statistics",
                     [&c](const Value& v) -> std::optional<std::string> {
                         if (v.kind != Value::Kind::string)
                             return "expected \"expected\" or \"poisson\"";
                         if (v.str == "expected") {
                             c.statistics = Statistics::expected;
                         } else if (v.str == "poisson") {
                             c.statistics = Statistics::poisson;
                         } else {
                             return "expected \"expected\" or \"poisson\"";
                         }
                         return std::nullopt;
                     });
        schema.field("seed", take_seed(&c.seed));
    }

    const bool uses_source = generates_data(c.kind) &&
                             c.kind != ExperimentKind::hom;
    if (uses_source || c.kind == ExperimentKind::brightness) {
        if (c.kind != ExperimentKind::power_scan) {
            schema.field("source.p1_uw", take_positive(&c.pump.p1_uw));
            schema.field("source.p2_uw", take_positive(&c.pump.p2_uw));
        }
        schema.field("source.rep_rate_hz", take_positive(&c.pump.rep_rate_hz));
        schema.field("source.pulse_fwhm_ps",
                     take_positive(&c.pump.pulse_fwhm_ps));
    }
    if (uses_source && c.kind != ExperimentKind::delay_scan &&
        c.kind != ExperimentKind::power_scan)
        schema.field("source.r", take_number(&squeeze_r_value, 0.0, 5.0));

    const bool uses_loss = is_tomo_kind(c.kind) || is_fringe_kind(c.kind) ||
                           c.kind == ExperimentKind::power_scan ||
                           c.kind == ExperimentKind::brightness ||
                           c.kind == ExperimentKind::budget;
    if (uses_loss) {
        schema.field("loss.waveguide_db",
                     take_number(&c.loss.waveguide_db, 0.0, 100.0));
        schema.field("loss.coupler_db",
                     take_number(&c.loss.coupler_db, 0.0, 100.0));
        schema.field("loss.manipulation_db",
                     take_number(&c.loss.manipulation_db, 0.0, 100.0));
        schema.field("loss.filters_db",
                     take_number(&c.loss.filters_db, 0.0, 100.0));
        schema.field("loss.detector_db",
                     take_number(&c.loss.detector_db, 0.0, 100.0));
        schema.field("loss.stated_total_db",
                     take_number(&c.loss.stated_total_db, 0.0, 100.0));
    }

    const bool uses_reference = is_tomo_kind(c.kind) ||
                                is_fringe_kind(c.kind) ||
                                c.kind == ExperimentKind::power_scan ||
                                c.kind == ExperimentKind::brightness;
    if (uses_reference) {
        schema.field("reference.power_uw", take_positive(&c.reference.power_uw));
        schema.field("reference.pairs_per_pulse",
                     take_number(&c.reference.pairs_per_pulse, 0.0, 0.25));
    }

    if (is_tomo_kind(c.kind) || is_fringe_kind(c.kind)) {
        schema.field("noise.waveplate_angle_jitter_rad",
                     take_number(&c.noise.waveplate_angle_jitter_rad, 0.0,
                                 kPi));
        schema.field("noise.distinguishability",
                     take_number(&c.noise.distinguishability, 0.0, 1.0));
        if (c.kind != ExperimentKind::fringe1)
            schema.field("noise.include_higher_order",
                         take_bool(&c.noise.include_higher_order));
        schema.field("detection.tree_h", take_int(&c.detection.tree_h, 1, 8));
        schema.field("detection.tree_v", take_int(&c.detection.tree_v, 1, 8));
        schema.field("detection.dark_count_hz",
                     take_number(&c.detection.dark_count_hz, 0.0, 1.0e9));
        schema.field("detection.window_ns",
                     take_positive(&c.detection.window_ns));
    } else if (c.kind == ExperimentKind::hom) {
        schema.field("noise.distinguishability",
                     take_number(&c.noise.distinguishability, 0.0, 1.0));
    }

    if (is_scan_kind(c.kind)) {
        const bool angle_axis = is_fringe_kind(c.kind);
        schema.field("scan.start",
                     angle_axis ? take_angle(&c.scan.start, -100.0, 100.0)
                                : take_finite(&c.scan.start),
                     true);
        schema.field("scan.stop",
                     angle_axis ? take_angle(&c.scan.stop, -100.0, 100.0)
                                : take_finite(&c.scan.stop),
                     true);
        int min_points = c.kind == ExperimentKind::power_scan ? 2 : 8;
        schema.field("scan.points", take_int(&c.scan.points, min_points, 100000),
                     true);
    }

    switch (c.kind) {
        case ExperimentKind::delay_scan:
            schema.field("delay.background_hz",
                         take_number(&c.delay_background_hz, 0.0, 1.0e12));
            schema.field("delay.peak_hz", take_positive(&c.delay_peak_hz));
            schema.field("delay.integration_s",
                         take_positive(&c.integration_s));
            break;
        case ExperimentKind::power_scan:
            schema.field("power.integration_s",
                         take_positive(&c.integration_s));
            break;
        case ExperimentKind::hom:
            schema.field("hom.rate_hz", take_positive(&c.hom_rate_hz));
            schema.field("hom.integration_s", take_positive(&c.integration_s));
            schema.field("hom.envelope_fwhm_ps",
                         take_positive(&c.hom_envelope_fwhm_ps));
            break;
        case ExperimentKind::fringe1:
        case ExperimentKind::fringe2:
        case ExperimentKind::fringe4:
            schema.field("fringe.theta",
                         take_angle(&c.fringe_theta, 0.0, kPi / 2.0));
            schema.field("fringe.pattern_h",
                         take_int(&c.fringe_pattern.clicks_h, 0, 8));
            schema.field("fringe.pattern_v",
                         take_int(&c.fringe_pattern.clicks_v, 0, 8));
            schema.field("fringe.integration_s",
                         take_positive(&c.integration_s));
            break;
        case ExperimentKind::tomo2:
        case ExperimentKind::tomo4:
        case ExperimentKind::tomo_fock:
            schema.field("tomography.integration_s",
                         take_positive(&c.integration_s));
            schema.field("tomography.resamples",
                         take_int(&c.resamples, 0, 100000));
            break;
        case ExperimentKind::brightness:
            schema.field("pulse.input_fwhm_ps",
                         take_positive(&c.pulse.input_fwhm_ps));
            schema.field("pulse.input_bandwidth_nm",
                         take_positive(&c.pulse.input_bandwidth_nm));
            schema.field("pulse.filter_bandwidth_nm",
                         take_positive(&c.pulse.filter_bandwidth_nm));
            break;
        case ExperimentKind::budget: break;
    }

    std::vector<std::string> issues = schema.run(table);

    if (generates_data(c.kind) && c.statistics == Statistics::poisson &&
        !seed_given)
        issues.push_back(
            "missing required key 'seed' (sampling runs must be seeded; set "
            "statistics = \"expected\" for a noise-free run)");
    if (is_scan_kind(c.kind) && table.has("scan.start") &&
        table.has("scan.stop") && !(c.scan.stop > c.scan.start))
        issues.push_back("'scan.stop': must be greater than scan.start");
    if (c.kind == ExperimentKind::power_scan && table.has("scan.start") &&
        c.scan.start <= 0.0)
        issues.push_back("'scan.start': pump power must be > 0");
    if (is_fringe_kind(c.kind)) {
        if (c.fringe_pattern.clicks_h > c.detection.tree_h)
            issues.push_back(
                "'fringe.pattern_h': exceeds detection.tree_h detectors");
        if (c.fringe_pattern.clicks_v > c.detection.tree_v)
            issues.push_back(
                "'fringe.pattern_v': exceeds detection.tree_v detectors");
        if (c.fringe_pattern.clicks_h + c.fringe_pattern.clicks_v < 1)
            issues.push_back(
                "'fringe.pattern_h': pattern must include at least one click");
    }
    if (c.resamples == 1)
        issues.push_back(
            "'tomography.resamples': need at least 2 resamples (or 0 to skip "
            "error bars)");

    if (!issues.empty()) throw ConfigError(std::move(issues));

    if (squeeze_r_value >= 0.0) c.squeeze_r = squeeze_r_value;
    if (c.hom_envelope_fwhm_ps <= 0.0)
        c.hom_envelope_fwhm_ps = c.pump.pulse_fwhm_ps;
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_table(toml::parse_file(path));
}

} // namespace fockforge
