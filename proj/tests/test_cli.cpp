#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const char* binary() { return FOCKFORGE_BIN; }

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path out_file = fs::temp_directory_path() /
                        ("fockforge_cli_out_" + std::to_string(counter));
    fs::path err_file = fs::temp_directory_path() /
                        ("fockforge_cli_err_" + std::to_string(counter));
    ++counter;
    std::string cmd = std::string(binary()) + " " + args + " > " +
                      out_file.string() + " 2> " + err_file.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    fs::remove(out_file);
    fs::remove(err_file);
    return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

std::string slurp_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string kTomoConfig =
    "kind = \"tomo2\"\n"
    "seed = 9\n"
    "[source]\n"
    "r = 0.0447\n"
    "[loss]\n"
    "stated_total_db = 0\n"
    "[tomography]\n"
    "integration_s = 0.001\n"
    "resamples = 0\n";

} // namespace

TEST_CASE("list-kinds names every experiment") {
    RunResult r = run_cli("list-kinds");
    CHECK(r.exit_code == 0);
    for (const char* name :
         {"delay_scan", "power_scan", "hom", "fringe1", "fringe2", "fringe4",
          "tomo2", "tomo4", "tomo_fock", "brightness", "budget"})
        CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("validate accepts a good config and rejects a bad one") {
    fs::path good = write_config("ff_cli_good.toml", kTomoConfig);
    RunResult ok = run_cli("validate " + good.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("tomo2") != std::string::npos);

    fs::path bad = write_config(
        "ff_cli_bad.toml", "kind = \"tomo2\"\nbogus = 1\n[tomography]\n"
                           "integration_s = -1\n");
    RunResult rejected = run_cli("validate " + bad.string());
    CHECK(rejected.exit_code == 2);
    CHECK(rejected.err.find("bogus") != std::string::npos);
    CHECK(rejected.err.find("integration_s") != std::string::npos);

    fs::path broken = write_config("ff_cli_broken.toml", "kind = \n");
    CHECK(run_cli("validate " + broken.string()).exit_code == 2);

    CHECK(run_cli("validate /nonexistent/missing.toml").exit_code == 2);
}

TEST_CASE("run produces byte-identical outputs for the same seed") {
    fs::path config = write_config("ff_cli_tomo.toml", kTomoConfig);
    fs::path dir_a = fs::temp_directory_path() / "ff_cli_run_a";
    fs::path dir_b = fs::temp_directory_path() / "ff_cli_run_b";
    fs::path dir_c = fs::temp_directory_path() / "ff_cli_run_c";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    fs::remove_all(dir_c);

    RunResult a = run_cli("run " + config.string() + " --out " +
                          dir_a.string());
    CHECK(a.exit_code == 0);
    CHECK(a.out.find("fockforge 0.1.0") == 0);
    RunResult b = run_cli("run " + config.string() + " --out " +
                          dir_b.string());
    CHECK(b.exit_code == 0);

    CHECK(slurp_file(dir_a / "counts.csv") == slurp_file(dir_b / "counts.csv"));
    CHECK(slurp_file(dir_a / "rho.json") == slurp_file(dir_b / "rho.json"));
    CHECK(slurp_file(dir_a / "report.json") ==
          slurp_file(dir_b / "report.json"));

    RunResult c = run_cli("run " + config.string() + " --seed 10 --out " +
                          dir_c.string());
    CHECK(c.exit_code == 0);
    CHECK(slurp_file(dir_a / "counts.csv") != slurp_file(dir_c / "counts.csv"));
}

TEST_CASE("numerical failure exits with code three") {
    fs::path config = write_config(
        "ff_cli_fail.toml",
        "kind = \"tomo2\"\nstatistics = \"expected\"\n[source]\n"
        "rep_rate_hz = 1\nr = 0.0447\n[tomography]\n"
        "integration_s = 0.001\nresamples = 0\n");
    fs::path dir = fs::temp_directory_path() / "ff_cli_fail_out";
    fs::remove_all(dir);
    RunResult r = run_cli("run " + config.string() + " --out " + dir.string());
    CHECK(r.exit_code == 3);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(slurp_file(dir / "report.txt").find("converged: NO") !=
          std::string::npos);
}

TEST_CASE("config errors exit with code two") {
    fs::path config = write_config("ff_cli_noseed.toml",
                                   "kind = \"tomo2\"\n[tomography]\n"
                                   "resamples = 0\n");
    RunResult r = run_cli("run " + config.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("seed") != std::string::npos);
}
