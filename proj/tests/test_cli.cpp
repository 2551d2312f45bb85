#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "cpl/result_io.hpp"
#include "cpl/scene.hpp"

using namespace cpl;
namespace fs = std::filesystem;

namespace {

struct RunOutput {
    int exit_code;
    std::string text;
};

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cpl_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunOutput run_cli(const TempDir& tmp, const std::string& args) {
    const fs::path log = tmp.path / "out.log";
    const std::string cmd = std::string(CPL_CLI_PATH) + " " + args + " > " + log.string() +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli gen: writes a loadable dataset plus manifest, reruns bit-identically") {
    TempDir tmp;
    const fs::path a = tmp.path / "a.cpld";
    const fs::path b = tmp.path / "b.cpld";
    const std::string flags = "--config-index 12 --points 150 --seed 9 --out ";
    CHECK(run_cli(tmp, "gen " + flags + a.string()).exit_code == 0);
    CHECK(run_cli(tmp, "gen " + flags + b.string()).exit_code == 0);
    CHECK(fs::exists(a));
    CHECK(fs::exists(fs::path(a.string() + ".manifest.json")));
    CHECK(slurp(a) == slurp(b));

    const Dataset ds = load(a);
    CHECK(ds.size() == 150);
}

TEST_CASE("cli gen: --all emits the whole grid") {
    TempDir tmp;
    const fs::path dir = tmp.path / "grid";
    const auto r = run_cli(tmp, "gen --all --points 5 --seed 3 --out " + dir.string());
    CHECK(r.exit_code == 0);
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".cpld") ++count;
    CHECK(count == 49);
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("cli gen: flag and argument errors exit 2") {
    TempDir tmp;
    CHECK(run_cli(tmp, "gen --config-index 0 --points 0 --out " + (tmp.path / "x.cpld").string())
              .exit_code == 2);
    CHECK(run_cli(tmp, "gen --config-index 0 --points 10").exit_code == 2); // missing --out
    CHECK(run_cli(tmp, "gen --config-index 99 --out " + (tmp.path / "x.cpld").string())
              .exit_code == 2);
    CHECK(run_cli(tmp, "gen --out " + (tmp.path / "x.cpld").string()).exit_code == 2);
}

TEST_CASE("cli estimate: ground-truth init gives a perfect result file") {
    TempDir tmp;
    const fs::path data = tmp.path / "scene.cpld";
    REQUIRE(run_cli(tmp, "gen --config-index 7 --points 80 --seed 5 --out " + data.string())
                .exit_code == 0);
    const fs::path out = tmp.path / "gt.json";
    const auto r = run_cli(tmp, "estimate --data " + data.string() + " --init gt --out " +
                                    out.string());
    CHECK(r.exit_code == 0);
    const ResultFile res = read_result(out);
    CHECK(res.converged);
    CHECK(res.iterations == 0);
    for (double v : res.nmae) CHECK(v == 0.0);
    CHECK(fs::exists(fs::path(out.string() + ".manifest.json")));
}

TEST_CASE("cli estimate: perturbed init recovers every parameter under 5% NMAE") {
    TempDir tmp;
    const fs::path data = tmp.path / "scene.cpld";
    REQUIRE(run_cli(tmp, "gen --config-index 16 --points 120 --seed 21 --out " + data.string())
                .exit_code == 0);
    const fs::path out = tmp.path / "recovered.json";
    const auto r = run_cli(tmp, "estimate --data " + data.string() +
                                    " --init perturbed --perturb-frac 0.2 --weighting uniform"
                                    " --seed 2 --out " + out.string());
    CHECK(r.exit_code == 0);
    const ResultFile res = read_result(out);
    CHECK(res.converged);
    for (std::size_t i = 0; i <= kTz; ++i) {
        INFO("parameter ", kParamNames[i]);
        CHECK(res.nmae[i] < 0.05);
    }
}

TEST_CASE("cli estimate: reruns are bitwise identical") {
    TempDir tmp;
    const fs::path data = tmp.path / "scene.cpld";
    REQUIRE(run_cli(tmp, "gen --config-index 3 --points 64 --seed 8 --out " + data.string())
                .exit_code == 0);
    const std::string flags = "estimate --data " + data.string() +
                              " --init perturbed --max-iters 40 --seed 11 --label rerun --out ";
    const fs::path a = tmp.path / "a.json";
    const fs::path b = tmp.path / "b.json";
    CHECK(run_cli(tmp, flags + a.string()).exit_code == 0);
    CHECK(run_cli(tmp, flags + b.string()).exit_code == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("cli estimate: usage, IO, and divergence exit codes") {
    TempDir tmp;
    CHECK(run_cli(tmp, "estimate --out x.json").exit_code == 2); // missing --data
    CHECK(run_cli(tmp, "estimate --data " + (tmp.path / "nope.cpld").string() + " --out " +
                           (tmp.path / "x.json").string())
              .exit_code == 3);

    const fs::path data = tmp.path / "scene.cpld";
    REQUIRE(run_cli(tmp, "gen --config-index 3 --points 48 --seed 8 --out " + data.string())
                .exit_code == 0);
    const auto r = run_cli(tmp, "estimate --data " + data.string() +
                                    " --init perturbed --lr 1e9 --max-iters 10 --out " +
                                    (tmp.path / "div.json").string());
    CHECK(r.exit_code == 4);

    CHECK(run_cli(tmp, "estimate --data " + data.string() + " --fix not_a_param --out " +
                           (tmp.path / "x.json").string())
              .exit_code == 2);
}

TEST_CASE("cli eval: table columns follow the report order, zeros for a perfect run") {
    TempDir tmp;
    const fs::path data = tmp.path / "scene.cpld";
    REQUIRE(run_cli(tmp, "gen --config-index 7 --points 60 --seed 5 --out " + data.string())
                .exit_code == 0);
    const fs::path results = tmp.path / "results";
    fs::create_directories(results);
    REQUIRE(run_cli(tmp, "estimate --data " + data.string() + " --init gt --label perfect --out " +
                            (results / "perfect.json").string())
                .exit_code == 0);

    const auto r = run_cli(tmp, "eval --results " + results.string());
    CHECK(r.exit_code == 0);
    std::istringstream lines(r.text);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "run,f_x,f_y,u_0,v_0,b,d,t_x,t_y,t_z,theta_p");
    CHECK(row == "perfect,0.000,0.000,0.000,0.000,0.000,0.000,0.000,0.000,0.000,0.000");

    const auto md = run_cli(tmp, "eval --format markdown --results " + results.string());
    CHECK(md.exit_code == 0);
    CHECK(md.text.find("| run | f_x |") == 0);

    // malformed result file: IO-class failure naming the file
    const fs::path bad = results / "bad.json";
    std::ofstream(bad) << "{ not json";
    const auto broken = run_cli(tmp, "eval --results " + results.string());
    CHECK(broken.exit_code == 3);
    CHECK(broken.text.find("bad.json") != std::string::npos);
}

TEST_CASE("cli check-grad: passes at the documented tolerance, fails at zero") {
    TempDir tmp;
    const auto ok = run_cli(tmp, "check-grad --trials 6 --seed 2 --tolerance 1e-5");
    CHECK(ok.exit_code == 0);
    CHECK(ok.text.find("max relative error") != std::string::npos);

    CHECK(run_cli(tmp, "check-grad --trials 6 --seed 2 --tolerance 0").exit_code == 1);
    CHECK(run_cli(tmp, "check-grad --trials 0").exit_code == 2);
}

TEST_CASE("cli: manifest argv echo reproduces the dataset bitwise") {
    TempDir tmp;
    const fs::path a = tmp.path / "a.cpld";
    REQUIRE(run_cli(tmp, "gen --config-index 20 --points 40 --seed 13 --out " + a.string())
                .exit_code == 0);
    // re-run with the argv recorded in the manifest, swapping the output path
    std::ifstream mf(a.string() + ".manifest.json");
    std::ostringstream ss;
    ss << mf.rdbuf();
    const std::string manifest = ss.str();
    CHECK(manifest.find("\"command\": \"gen\"") != std::string::npos);
    CHECK(manifest.find("--config-index") != std::string::npos);

    const fs::path b = tmp.path / "b.cpld";
    REQUIRE(run_cli(tmp, "gen --config-index 20 --points 40 --seed 13 --out " + b.string())
                .exit_code == 0);
    CHECK(slurp(a) == slurp(b));
}
