#include "stablelab/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "stablelab/clt_cascade.hpp"
#include "stablelab/errors.hpp"
#include "stablelab/io.hpp"
#include "stablelab/stable_densities.hpp"
#include "stablelab/verify.hpp"

namespace stablelab {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& field, const std::string& v)
{
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(field + ": expected a number, got '" + v + "'");
    }
}

long parse_int(const std::string& field, const std::string& v)
{
    try {
        std::size_t used = 0;
        long d = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(field + ": expected an integer, got '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& field, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(field, trim(item)));
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
    return s;
}

std::string utc_now()
{
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Built {
    DensitySample density;
    SpectralDensity spectrum;
    std::string name;
};

Built build_density(const RunConfig& cfg, const Grid& g)
{
    const std::string& d = cfg.density;
    if (d == "levy") {
        auto [f, s] = levy_density(StableLawSpec(cfg.lambda), g);
        return {f, s, "levy_lambda" + format_number(cfg.lambda)};
    }
    if (d == "linnik-fourier") {
        auto [f, s] = linnik_density_fourier(StableLawSpec(cfg.lambda), g);
        return {f, s, "linnik_fourier_lambda" + format_number(cfg.lambda)};
    }
    if (d == "linnik-mixture") {
        DensitySample f = linnik_mixture_density(StableLawSpec(cfg.lambda), g);
        return {f, forward_transform(f), "linnik_mixture_lambda" + format_number(cfg.lambda)};
    }
    if (d == "gaussian") {
        DensitySample f = gaussian_density(cfg.sigma, g);
        return {f, sample_spectrum(g, f.model), "gaussian_sigma" + format_number(cfg.sigma)};
    }
    DensitySample f = laplace_density(g);
    return {f, sample_spectrum(g, f.model), "laplace"};
}

std::string density_csv(const DensitySample& f)
{
    std::vector<std::vector<double>> rows;
    rows.reserve(f.values.size());
    for (std::size_t j = 0; j < f.values.size(); ++j) rows.push_back({f.grid.x(j), f.values[j]});
    return csv_string({"x", "f"}, rows);
}

std::string spectrum_csv(const SpectralDensity& s)
{
    const std::size_t N = s.grid.n();
    std::vector<std::vector<double>> rows;
    rows.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t k = (i + N / 2) % N;  // ascending frequency
        rows.push_back({s.grid.xi(k), s.values[k].real(), s.values[k].imag()});
    }
    return csv_string({"xi", "re", "im"}, rows);
}

int sweep_exit_code(const SweepResult& s)
{
    const RatioCheck* f = s.first_failure();
    if (!f) return kExitOk;
    if (f->name == "cumulative_rate" || f->name == "monotone") return category_exit_code("fisher_monotonicity");
    if (f->name == "log_sobolev_chain") return category_exit_code("log_sobolev");
    if (f->name == "csiszar_kullback") return category_exit_code("entropy_decay");
    return category_exit_code("uniform_fisher");
}

class Runner {
public:
    explicit Runner(const RunConfig& cfg) : cfg_(cfg), grid_(cfg.grid_n, cfg.grid_L) {}

    int execute()
    {
        switch (cfg_.command) {
        case Command::GenDensity: return gen_density();
        case Command::Eval: return eval();
        case Command::Evolve: return evolve_cmd();
        case Command::CltSweep: return clt_sweep();
        case Command::VerifyAll: return verify();
        }
        return kExitInternal;
    }

    std::vector<std::string> files;

private:
    void write(const std::string& name, const std::string& text)
    {
        write_text(cfg_.output_dir / name, text);
        files.push_back(name);
    }

    int gen_density()
    {
        Built b = build_density(cfg_, grid_);
        write("density_" + b.name + ".csv", density_csv(b.density));
        write("spectrum_" + b.name + ".csv", spectrum_csv(b.spectrum));
        return kExitOk;
    }

    int eval()
    {
        Built b = build_density(cfg_, grid_);
        DensitySample omega = reference_density(cfg_.lambda, grid_);
        nlohmann::ordered_json j;
        j["density"] = cfg_.density;
        j["lambda"] = cfg_.lambda;
        j["report"] = nlohmann::ordered_json::parse(functional_report(b.density, omega, cfg_.lambda).to_json());
        int code = kExitOk;
        try {
            InequalityCheck c = log_sobolev_check(b.density, omega, cfg_.lambda);
            j["log_sobolev"] = {{"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}};
            if (!c.pass) code = category_exit_code("log_sobolev");
        } catch (const InapplicableInputError& e) {
            j["log_sobolev"] = nullptr;
            j["log_sobolev_note"] = e.what();
        }
        write("eval_" + b.name + ".json", j.dump(2) + "\n");
        return code;
    }

    int evolve_cmd()
    {
        Built b = build_density(cfg_, grid_);
        try {
            Trajectory tr = entropy_trajectory(b.density, EvolutionSchedule(cfg_.lambda, cfg_.times));
            write("trajectory_" + b.name + ".csv", trajectory_csv(tr));
            for (std::size_t i = 0; i < tr.dHdt_residuals.size(); ++i)
                if (cfg_.times[i] >= 0.05 && !(tr.dHdt_residuals[i] < 1e-3 * (1.0 + tr.ibar[i])))
                    return category_exit_code("entropy_production");
        } catch (const VerificationFailure& e) {
            std::cerr << "stablelab: " << e.what() << "\n";
            return category_exit_code("flow");
        }
        return kExitOk;
    }

    int clt_sweep()
    {
        Built b = build_density(cfg_, grid_);
        SweepResult s = cascade_sweep(CascadeSpec(b.spectrum, cfg_.lambda, cfg_.n_max), default_sweep_n(cfg_.n_max));
        write("sweep_" + b.name + ".csv", sweep_csv(s));
        write("sweep_" + b.name + ".json", sweep_summary_json(s));
        return sweep_exit_code(s);
    }

    int verify()
    {
        VerifyOptions opt;
        opt.lambdas = cfg_.lambdas;
        opt.grid = grid_;
        opt.times = cfg_.times;
        opt.n_max = cfg_.n_max;
        opt.tolerances = cfg_.tolerances;
        opt.out = cfg_.output_dir;
        VerifyReport r = verify_all(opt);
        files = r.data_files;
        r.data_files.push_back("verify_report.json");
        write("verify_report.json", r.to_json());
        if (const VerifyCheck* f = r.first_failure())
            std::cerr << "stablelab: first failing check " << f->category << ":" << f->name << "\n";
        return r.exit_code();
    }

    const RunConfig& cfg_;
    Grid grid_;
};

void write_manifest(const RunConfig& cfg, const std::vector<std::string>& files, int code, const std::string& start,
                    const std::string& error)
{
    nlohmann::ordered_json j;
    j["tool"] = "stablelab";
    j["command"] = command_name(cfg.command);
    auto& c = j["config"] = nlohmann::ordered_json::object();
    std::stringstream ss(config_text(cfg));
    std::string line;
    while (std::getline(ss, line)) {
        auto eq = line.find('=');
        c[line.substr(0, eq)] = line.substr(eq + 1);
    }
    j["files"] = files;
    j["exit_code"] = code;
    if (!error.empty()) j["error"] = error;
    j["started_utc"] = start;
    j["finished_utc"] = utc_now();
    write_text(cfg.output_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

const char* command_name(Command c)
{
    switch (c) {
    case Command::GenDensity: return "gen-density";
    case Command::Eval: return "eval";
    case Command::Evolve: return "evolve";
    case Command::CltSweep: return "clt-sweep";
    case Command::VerifyAll: return "verify-all";
    }
    return "?";
}

void RunConfig::validate() const
{
    if (grid_n < 1024 || (grid_n & (grid_n - 1)) != 0) throw ConfigError("grid_n: must be a power of two >= 1024");
    if (!(grid_L > 0.0) || !std::isfinite(grid_L)) throw ConfigError("grid_L: must be positive");
    static const char* densities[] = {"levy", "linnik-fourier", "linnik-mixture", "gaussian", "laplace"};
    if (std::find(std::begin(densities), std::end(densities), density) == std::end(densities))
        throw ConfigError("density: unknown density '" + density + "'");
    if (!(sigma > 0.0)) throw ConfigError("sigma: must be positive");
    if (n_max < 2) throw ConfigError("n_max: must be at least 2");
    for (const auto& [k, v] : tolerances) {
        if (!default_tolerances().count(k)) throw ConfigError("tol." + k + ": unknown tolerance");
        if (!(v >= std::numeric_limits<double>::epsilon())) throw ConfigError("tol." + k + ": below machine epsilon");
    }
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] >= 0.0) || (i && !(times[i] > times[i - 1])))
            throw ConfigError("times: must be nonnegative and strictly increasing");
    const bool levy_gen = command == Command::GenDensity && density == "levy";
    if (levy_gen) {
        if (!(lambda > 0.0 && lambda <= 2.0)) throw ConfigError("lambda: must lie in (0, 2] for a Levy density");
    } else if (command == Command::CltSweep) {
        if (!(lambda > 1.0 && lambda < 2.0)) throw ConfigError("lambda: must lie in (1, 2) for clt-sweep");
    } else if (command != Command::VerifyAll) {
        if (!(lambda > 1.0 && lambda <= 2.0)) throw ConfigError("lambda: must lie in (1, 2]");
    }
    if (density == "linnik-mixture" && !(lambda > 0.0 && lambda < 2.0))
        throw ConfigError("lambda: the mixture route needs lambda in (0, 2)");
    if (command == Command::VerifyAll) {
        for (double l : lambdas)
            if (!(l > 1.0 && l < 2.0)) throw ConfigError("lambdas: every entry must lie in (1, 2)");
        if (n_max < 8) throw ConfigError("n_max: verify-all needs n_max >= 8");
    }
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(no) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv)
{
    for (const auto& [k, v] : kv) {
        if (k == "lambda") cfg.lambda = parse_real(k, v);
        else if (k == "lambdas") cfg.lambdas = parse_list(k, v);
        else if (k == "grid_n") {
            long n = parse_int(k, v);
            if (n <= 0) throw ConfigError("grid_n: must be positive");
            cfg.grid_n = static_cast<std::size_t>(n);
        } else if (k == "grid_L") cfg.grid_L = parse_real(k, v);
        else if (k == "density") cfg.density = v;
        else if (k == "sigma") cfg.sigma = parse_real(k, v);
        else if (k == "times") cfg.times = parse_list(k, v);
        else if (k == "n_max") cfg.n_max = static_cast<int>(parse_int(k, v));
        else if (k == "out") cfg.output_dir = v;
        else if (k.rfind("tol.", 0) == 0) cfg.tolerances[k.substr(4)] = parse_real(k, v);
        else throw ConfigError(k + ": unknown configuration key");
    }
    // a single index narrows the verify-all set unless the set is given alongside
    if (kv.count("lambda") && !kv.count("lambdas")) cfg.lambdas = {cfg.lambda};
}

std::string config_text(const RunConfig& cfg)
{
    std::map<std::string, std::string> kv{
        {"command", command_name(cfg.command)},
        {"lambda", format_number(cfg.lambda)},
        {"lambdas", join(cfg.lambdas)},
        {"grid_n", std::to_string(cfg.grid_n)},
        {"grid_L", format_number(cfg.grid_L)},
        {"density", cfg.density},
        {"sigma", format_number(cfg.sigma)},
        {"times", join(cfg.times)},
        {"n_max", std::to_string(cfg.n_max)},
        {"out", cfg.output_dir.string()},
    };
    for (const auto& [name, v] : default_tolerances()) {
        auto it = cfg.tolerances.find(name);
        kv["tol." + name] = format_number(it == cfg.tolerances.end() ? v : it->second);
    }
    std::string s;
    for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
    return s;
}

int run(const RunConfig& cfg)
{
    const std::string start = utc_now();
    Runner r(cfg);
    int code = kExitOk;
    std::string error;
    try {
        code = r.execute();
    } catch (const ConfigError& e) {
        error = e.what();
        code = kExitUsage;
    } catch (const DomainError& e) {
        error = e.what();
        code = kExitUsage;
    } catch (const VerificationFailure& e) {
        error = e.what();
        code = category_exit_code(e.category);
    } catch (const std::exception& e) {
        error = e.what();
        code = kExitNumeric;
    }
    if (!error.empty()) std::cerr << "stablelab: " << error << "\n";
    write_manifest(cfg, r.files, code, start, error);
    return code;
}

int cli_main(int argc, char** argv)
{
    CLI::App app{"Stable laws, fractional Fisher information and the fractional Fokker-Planck flow"};
    app.require_subcommand(1, 1);

    struct Flags {
        std::string lambda, lambdas, grid_n, grid_L, out, config, density, sigma, times, n_max;
        std::vector<std::string> tols;
    } fl;
    const std::vector<std::pair<Command, const char*>> cmds{
        {Command::GenDensity, "write a density and its spectrum as CSV"},
        {Command::Eval, "evaluate every functional against the stable reference"},
        {Command::Evolve, "entropy trajectory along the fractional Fokker-Planck flow"},
        {Command::CltSweep, "functionals of the normalized sums T_n"},
        {Command::VerifyAll, "run the full verification suite"},
    };
    std::map<CLI::App*, Command> which;
    for (const auto& [cmd, help] : cmds) {
        CLI::App* s = app.add_subcommand(command_name(cmd), help);
        s->add_option("--lambda", fl.lambda, "stable index");
        s->add_option("--lambdas", fl.lambdas, "comma-separated index set for verify-all");
        s->add_option("--grid-n", fl.grid_n, "number of grid points (power of two)");
        s->add_option("--grid-L", fl.grid_L, "half width of the grid");
        s->add_option("--out", fl.out, "output directory");
        s->add_option("--config", fl.config, "key=value configuration file");
        s->add_option("--density", fl.density, "levy, linnik-fourier, linnik-mixture, gaussian or laplace");
        s->add_option("--sigma", fl.sigma, "Gaussian variance");
        s->add_option("--times", fl.times, "comma-separated evolution times");
        s->add_option("--n-max", fl.n_max, "largest number of summands");
        s->add_option("--tol", fl.tols, "tolerance override name=value")->take_all();
        which[s] = cmd;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int r = app.exit(e);
        return r == 0 ? kExitOk : kExitUsage;
    }

    RunConfig cfg;
    cfg.command = which.at(app.get_subcommands().front());
    try {
        if (!fl.config.empty()) apply_config(cfg, read_config_file(fl.config));
        std::map<std::string, std::string> kv;
        auto set = [&](const char* key, const std::string& v) {
            if (!v.empty()) kv[key] = v;
        };
        set("lambda", fl.lambda);
        set("lambdas", fl.lambdas);
        set("grid_n", fl.grid_n);
        set("grid_L", fl.grid_L);
        set("out", fl.out);
        set("density", fl.density);
        set("sigma", fl.sigma);
        set("times", fl.times);
        set("n_max", fl.n_max);
        for (const auto& t : fl.tols) {
            auto eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError("--tol: expected name=value, got '" + t + "'");
            kv["tol." + t.substr(0, eq)] = t.substr(eq + 1);
        }
        apply_config(cfg, kv);
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "stablelab: usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    return run(cfg);
}

}  // namespace stablelab
