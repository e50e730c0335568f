#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace stablelab {

enum class Command { GenDensity, Eval, Evolve, CltSweep, VerifyAll };

const char* command_name(Command c);

struct RunConfig {
    Command command = Command::VerifyAll;
    double lambda = 1.5;
    std::vector<double> lambdas{1.2, 1.5, 1.8};
    std::size_t grid_n = 1 << 16;
    double grid_L = 200.0;
    std::string density = "linnik-fourier";  // levy, linnik-fourier, linnik-mixture, gaussian, laplace
    double sigma = 1.0;                       // Gaussian variance
    std::vector<double> times{0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    int n_max = 64;
    std::filesystem::path output_dir = "out";
    std::map<std::string, double> tolerances;

    // throws ConfigError naming the offending field
    void validate() const;
};

// flat key=value lines; '#' starts a comment. Keys: lambda, lambdas, grid_n, grid_L, density,
// sigma, times, n_max, out, tol.<name>
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv);

// resolved configuration as flat key=value text, one key per line, sorted
std::string config_text(const RunConfig& cfg);

// executes the command and writes its files plus manifest.json; returns the exit status
int run(const RunConfig& cfg);

// argv front end: parses, resolves config file then flags, runs
int cli_main(int argc, char** argv);

}  // namespace stablelab
