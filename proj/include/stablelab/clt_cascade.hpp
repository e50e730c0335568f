#pragma once

#include <string>
#include <vector>

#include "stablelab/fokker_planck.hpp"

namespace stablelab {

struct CascadeSpec {
    SpectralDensity base;
    double lambda;
    int n_max;
    CascadeSpec(SpectralDensity base, double lambda, int n_max);
};

// f^(xi n^{-1/lambda})^n
SpectralDensity normalized_sum_spectrum(const SpectralDensity& base, int n, double lambda);
DensitySample normalized_sum_density(const SpectralDensity& base, int n, double lambda);

std::vector<int> default_sweep_n(int n_max);

// pass = measured <= bound + slack
struct RatioCheck {
    int n = 0;
    std::string name;
    double bound = 0.0;
    double slack = 0.0;
    double measured = 0.0;
    bool pass = false;
};

struct SweepRow {
    int n = 0;
    double H_rel = 0.0, I = 0.0, I_lambda = 0.0, l1 = 0.0, tv = 0.0;
    double hk0 = 0.0, hk1 = 0.0;  // homogeneous norms of f_n - omega
    double bound_ratio = 0.0;     // I_lambda(T_n) / (n^{-(2-lambda)/lambda} I_lambda(X))
    bool pass = true;
};

struct SweepResult {
    double lambda = 0.0;
    std::vector<int> n_values;
    std::vector<FunctionalReport> reports;  // filled by the full sweep only
    std::vector<RatioCheck> ratio_checks;
    double rate_fit = 0.0;                  // least-squares slope of log value against log n, n >= 4
    std::vector<SweepRow> rows;
    std::vector<double> values;             // the swept quantity, one per n

    bool all_pass() const;
    const RatioCheck* first_failure() const;
};

// least-squares slope of log v against log n over n >= n_min
double loglog_slope(const std::vector<int>& n, const std::vector<double>& v, int n_min = 4);

// strict sweeps throw VerificationFailure at the first failing check

// I_lambda(T_n), n = 1..n_max: monotone, step ratio ((n-1)/n)^{(2-lambda)/lambda}, cumulative rate
SweepResult fisher_monotonicity_sweep(const CascadeSpec& spec, bool strict = true);

InequalityCheck blachman_stam_check(const SpectralDensity& f, const SpectralDensity& g, double eps, double lambda);

// H(T_n|omega) over n = 1, 2, 4, ...: log-Sobolev chain, Csiszar-Kullback, monotone decay, slope
SweepResult entropy_decay_sweep(const CascadeSpec& spec, bool strict = true);
SweepResult entropy_decay_sweep(const CascadeSpec& spec, const std::vector<int>& n_values, bool strict);

// C_k = sqrt((2k+3)/(2k+1)) (2 pi)^{-1/(2k+3)}
double interpolation_constant(int k);

struct SobolevSweep {
    SweepResult sweep;            // values: |f_n - omega| in the homogeneous H^k norm
    std::vector<double> ratios;   // |f_n|^2_{H^k} / |omega|^2_{H^k}, inhomogeneous; inf before f_n is in H^k
    double limsup_estimate = 0.0; // 2 r(n_last) - r(n_prev), first-order Richardson in 1/n
    int first_finite_n = 0;
};

// k <= 2; the uniform bound limsup |f_n|^2 <= 1.02 |omega|^2 and the interpolation inequality at f_8 - omega
SobolevSweep sobolev_convergence_sweep(const CascadeSpec& spec, int k, bool strict = true);

// I(Y1 + Y2 + Y3) <= (3/2) |f|_TV^2 for three unscaled copies
InequalityCheck tv_fisher_bound_check(const DensitySample& f);

// per-n rows with every functional, the cumulative rate, log-Sobolev chain, Csiszar-Kullback and the
// split TV bound on I(T_n) for n >= 3
SweepResult cascade_sweep(const CascadeSpec& spec, const std::vector<int>& n_values);

// columns n, H_rel, I, I_lambda, l1, tv, hk0, hk1, bound_ratio, pass
std::string sweep_csv(const SweepResult& s);
std::string sweep_summary_json(const SweepResult& s);

}  // namespace stablelab
