#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "stablelab/cli.hpp"
#include "stablelab/errors.hpp"

namespace fs = std::filesystem;
using namespace stablelab;

namespace {

const fs::path kRoot = fs::current_path() / "cli_test_out";

std::string cli()
{
    const char* p = std::getenv("STABLELAB_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int sh(const std::string& args)
{
    std::string cmd = "\"" + cli() + "\" " + args + " > /dev/null 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path fresh(const std::string& name)
{
    fs::path p = kRoot / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> rows(const fs::path& p, std::string* header = nullptr)
{
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    if (header) *header = line;
    std::vector<std::vector<double>> out;
    while (std::getline(is, line)) {
        std::vector<double> r;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) r.push_back(std::strtod(c.c_str(), nullptr));
        out.push_back(r);
    }
    return out;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST_CASE("gen-density levy at lambda 2 is the heat kernel")
{
    fs::path d = fresh("levy2");
    REQUIRE(sh("gen-density --density levy --lambda 2 --grid-n 4096 --grid-L 50 --out " + d.string()) == 0);
    std::string h;
    auto f = rows(d / "density_levy_lambda2.csv", &h);
    CHECK(h == "x,f");
    REQUIRE(f.size() == 4096);
    double err = 0;
    for (const auto& r : f) err = std::max(err, std::abs(r[1] - std::exp(-r[0] * r[0] / 4) / std::sqrt(4 * M_PI)));
    CHECK(err < 1e-12);
    auto s = rows(d / "spectrum_levy_lambda2.csv", &h);
    CHECK(h == "xi,re,im");
    REQUIRE(s.size() == 4096);
    for (std::size_t i = 1; i < s.size(); ++i) REQUIRE(s[i][0] > s[i - 1][0]);
    for (const auto& r : s) {
        REQUIRE(std::abs(r[1] - std::exp(-r[0] * r[0])) < 1e-14);
        REQUIRE(r[2] == 0.0);
    }
    auto m = manifest(d);
    CHECK(m["command"] == "gen-density");
    CHECK(m["exit_code"] == 0);
    CHECK(m["files"].size() == 2);
    CHECK(m.contains("started_utc"));
}

TEST_CASE("flags override the config file")
{
    fs::path d = fresh("precedence");
    {
        std::ofstream os(d / "run.cfg");
        os << "# test\nlambda = 1.3\ngrid_n=4096\ngrid_L=60   # half width\ndensity=levy\n";
    }
    REQUIRE(sh("gen-density --config " + (d / "run.cfg").string() + " --lambda 1.4 --out " + (d / "o").string()) ==
            0);
    auto m = manifest(d / "o");
    CHECK(m["config"]["lambda"] == "1.3999999999999999");
    CHECK(m["config"]["grid_n"] == "4096");
    CHECK(m["config"]["grid_L"] == "60");
    CHECK(fs::exists(d / "o" / "density_levy_lambda1.3999999999999999.csv"));
    CHECK(rows(d / "o" / "density_levy_lambda1.3999999999999999.csv").size() == 4096);
}

TEST_CASE("config parsing in process")
{
    RunConfig c;
    apply_config(c, {{"lambda", "1.7"}, {"times", "0, 1,2"}, {"tol.lsi", "1e-5"}, {"n_max", "12"}});
    CHECK(c.lambda == 1.7);
    CHECK(c.times == std::vector<double>{0, 1, 2});
    CHECK(c.tolerances.at("lsi") == 1e-5);
    CHECK(c.n_max == 12);
    CHECK(c.lambdas == std::vector<double>{1.7});
    apply_config(c, {{"lambda", "1.3"}, {"lambdas", "1.2,1.8"}});
    CHECK(c.lambdas == std::vector<double>{1.2, 1.8});
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(apply_config(c, {{"lamda", "1.7"}}), ConfigError);
    CHECK_THROWS_AS(apply_config(c, {{"lambda", "1.7x"}}), ConfigError);
    RunConfig b;
    b.grid_n = 3000;
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = RunConfig{};
    b.tolerances["lsi"] = 1e-20;
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = RunConfig{};
    b.times = {1, 0.5};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = RunConfig{};
    b.lambdas = {2.0};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = RunConfig{};
    b.command = Command::CltSweep;
    b.lambda = 2.0;
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b.command = Command::GenDensity;
    b.density = "levy";
    b.lambda = 0.7;
    CHECK_NOTHROW(b.validate());
    // config_text round-trips through apply_config
    RunConfig r;
    r.lambda = 1.25;
    r.times = {0.5, 3};
    std::map<std::string, std::string> kv;
    std::stringstream ss(config_text(r));
    for (std::string line; std::getline(ss, line);) {
        auto eq = line.find('=');
        if (line.substr(0, eq) != "command") kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    RunConfig back;
    apply_config(back, kv);
    CHECK(config_text(back) == config_text(r));
}

TEST_CASE("usage errors exit with 2")
{
    fs::path d = fresh("usage");
    {
        std::ofstream os(d / "bad.cfg");
        os << "lambda=1.5\nfoo=1\n";
    }
    CHECK(sh("eval --config " + (d / "bad.cfg").string() + " --out " + d.string()) == 2);
    CHECK(sh("eval --grid-n 1000 --out " + d.string()) == 2);
    CHECK(sh("eval --config " + (d / "missing.cfg").string()) == 2);
    CHECK(sh("frobnicate") == 2);
    CHECK(sh("") == 2);
    CHECK(sh("clt-sweep --lambda 2 --out " + d.string()) == 2);
    CHECK(sh("eval --tol nosuch=1 --out " + d.string()) == 2);
    CHECK(sh("eval --density cauchy --out " + d.string()) == 2);
}

TEST_CASE("eval reports every functional and the log-Sobolev check")
{
    fs::path d = fresh("eval");
    REQUIRE(sh("eval --lambda 1.5 --out " + d.string()) == 0);
    auto j = nlohmann::json::parse(slurp(d / "eval_linnik_fourier_lambda1.5.json"));
    CHECK(j["report"].contains("frac_fisher_lambda"));
    CHECK(j["report"]["fisher"].is_null());
    CHECK(j["log_sobolev"]["pass"] == true);
    CHECK(j["log_sobolev"]["lhs"].get<double>() <= j["log_sobolev"]["rhs"].get<double>());
    fs::path g = fresh("eval_gauss");
    REQUIRE(sh("eval --density gaussian --lambda 1.5 --out " + g.string()) == 0);
    auto jg = nlohmann::json::parse(slurp(g / "eval_gaussian_sigma1.json"));
    CHECK(jg["log_sobolev"].is_null());
    CHECK(jg["report"]["fisher"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("evolve writes one row per time")
{
    fs::path d = fresh("evolve");
    REQUIRE(sh("evolve --lambda 1.5 --times 0,0.5,1,2 --out " + d.string()) == 0);
    std::string h;
    auto t = rows(d / "trajectory_linnik_fourier_lambda1.5.csv", &h);
    CHECK(h == "t,H_rel,I,I_lambda,Ibar,dHdt_residual");
    REQUIRE(t.size() == 4);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i][1] < t[i - 1][1]);
    CHECK(sh("evolve --lambda 1.5 --times 1,0.5 --out " + d.string()) == 2);
}

TEST_CASE("clt-sweep rows and determinism")
{
    fs::path a = fresh("sweep_a"), b = fresh("sweep_b");
    REQUIRE(sh("clt-sweep --lambda 1.5 --n-max 16 --out " + a.string()) == 0);
    REQUIRE(sh("clt-sweep --lambda 1.5 --n-max 16 --out " + b.string()) == 0);
    std::string h;
    auto r = rows(a / "sweep_linnik_fourier_lambda1.5.csv", &h);
    CHECK(h == "n,H_rel,I,I_lambda,l1,tv,hk0,hk1,bound_ratio,pass");
    REQUIRE(r.size() == 12);
    for (std::size_t i = 1; i < r.size(); ++i) {
        CHECK(r[i][3] <= r[i - 1][3]);
        CHECK(r[i][9] == 1.0);
    }
    for (const char* f : {"sweep_linnik_fourier_lambda1.5.csv", "sweep_linnik_fourier_lambda1.5.json"})
        CHECK(slurp(a / f) == slurp(b / f));
    auto j = nlohmann::json::parse(slurp(a / "sweep_linnik_fourier_lambda1.5.json"));
    CHECK(j["all_pass"] == true);
}

TEST_CASE("verify-all on a reduced set")
{
    fs::path d = fresh("verify");
    REQUIRE(sh("verify-all --lambda 1.5 --n-max 16 --out " + d.string()) == 0);
    auto j = nlohmann::json::parse(slurp(d / "verify_report.json"));
    CHECK(j["all_pass"] == true);
    CHECK(j["exit_code"] == 0);
    CHECK(j["first_failure"].is_null());
    CHECK(j["categories"].size() == 11);
    for (const auto& f : j["data_files"]) CHECK(fs::exists(d / f.get<std::string>()));
    auto m = manifest(d);
    CHECK(m["exit_code"] == 0);
    CHECK(slurp(d / "verify_report.json").find("utc") == std::string::npos);

    // a tolerance below the attained accuracy makes the golden category fail first
    fs::path e = fresh("verify_fail");
    int rc = sh("verify-all --lambdas 1.5 --n-max 16 --tol golden.shannon_gaussian=1e-15 --out " + e.string());
    CHECK(rc == 12);
    auto je = nlohmann::json::parse(slurp(e / "verify_report.json"));
    CHECK(je["all_pass"] == false);
    CHECK(je["first_failure"] == "golden:golden.shannon_gaussian");
    CHECK(manifest(e)["exit_code"] == 12);
}
