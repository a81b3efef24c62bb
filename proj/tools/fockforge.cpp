#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "fockforge/config.hpp"
#include "fockforge/experiment.hpp"
#include "fockforge/toml.hpp"

namespace {

int run(const std::string& path, bool seed_set, std::uint64_t seed,
        const std::string& out_dir) {
    fockforge::ExperimentConfig config;
    try {
        config = fockforge::load_config(path);
    } catch (const fockforge::ConfigError& e) {
        std::fprintf(stderr, "%s: invalid config\n", path.c_str());
        for (const std::string& issue : e.issues)
            std::fprintf(stderr, "  %s\n", issue.c_str());
        return 2;
    } catch (const fockforge::toml::ParseError& e) {
        std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
        return 2;
    }
    if (seed_set) config.seed = seed;
    if (!out_dir.empty()) config.output_dir = out_dir;

    fockforge::RunReport report;
    try {
        report = fockforge::run_experiment(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return 1;
    }
    std::printf("%s", fockforge::report_to_text(report).c_str());
    if (!report.converged) {
        std::fprintf(stderr, "did not converge; see report.txt\n");
        return 3;
    }
    return 0;
}

int validate(const std::string& path) {
    try {
        fockforge::ExperimentConfig config = fockforge::load_config(path);
        std::printf("ok: %s\n", fockforge::kind_name(config.kind).c_str());
        return 0;
    } catch (const fockforge::ConfigError& e) {
        std::fprintf(stderr, "%s: invalid config\n", path.c_str());
        for (const std::string& issue : e.issues)
            std::fprintf(stderr, "  %s\n", issue.c_str());
        return 2;
    } catch (const fockforge::toml::ParseError& e) {
        std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-photon entangled-state experiment simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    CLI::App* run_cmd =
        app.add_subcommand("run", "run an experiment described by a config");
    run_cmd->add_option("config", config_path, "path to a .toml config")
        ->required();
    run_cmd->add_option("--seed", seed, "override the config's seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    run_cmd->add_option("--out", out_dir, "override the output directory");

    CLI::App* validate_cmd = app.add_subcommand(
        "validate", "check a config without running anything");
    validate_cmd->add_option("config", config_path, "path to a .toml config")
        ->required();

    CLI::App* list_cmd =
        app.add_subcommand("list-kinds", "list the experiment kinds");

    CLI11_PARSE(app, argc, argv);

    if (list_cmd->parsed()) {
        for (const auto& [kind, name] : fockforge::experiment_kinds())
            std::printf("%s\n", name.c_str());
        return 0;
    }
    if (validate_cmd->parsed()) return validate(config_path);
    return run(config_path, seed_set, seed, out_dir);
}
