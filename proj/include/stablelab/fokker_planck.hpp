#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stablelab/functionals.hpp"

namespace stablelab {

struct EvolutionSchedule {
    double lambda;
    std::vector<double> times;
    EvolutionSchedule(double lambda, std::vector<double> times);
};

// alpha = e^{-t/lambda}, beta = (1 - e^{-t})^{1/lambda}
std::pair<double, double> alpha_beta(double t, double lambda);

// f^(xi, t) = phi^(alpha xi) e^{-beta^lambda |xi|^lambda}
SpectralDensity evolve(const SpectralDensity& phi, double t, double lambda);
DensitySample evolve_density(const DensitySample& phi, double t, double lambda);

// sup |evolve(phi, t + s) - evolve(evolve(phi, t), s)| over the dual grid
double evolve_semigroup_check(const SpectralDensity& phi, double t, double s, double lambda);

// the stationary density omega_lambda (a variance-2 Gaussian at lambda = 2)
DensitySample reference_density(double lambda, const Grid& grid);

struct Trajectory {
    EvolutionSchedule schedule;
    std::vector<DensitySample> densities;
    std::vector<FunctionalReport> reports;
    std::vector<double> dHdt;
    std::vector<double> dHdt_residuals;  // |dH/dt + Ibar|
    std::vector<double> ibar;
};

inline constexpr double kMonotoneSlack = 1e-7;
inline constexpr double kDerivativeStep = 1e-3;

// throws VerificationFailure("monotonicity") when H increases beyond the slack
Trajectory entropy_trajectory(const DensitySample& phi, const EvolutionSchedule& schedule);
// columns t, H_rel, I, I_lambda, Ibar, dHdt_residual
std::string trajectory_csv(const Trajectory& tr);

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

// H(f|omega) <= lambda 2^{1/lambda} min{I(f), I(omega)}^{1/2} I_lambda(f)^{1/2}
InequalityCheck log_sobolev_check(const DensitySample& f, double lambda);
InequalityCheck log_sobolev_check(const DensitySample& f, const DensitySample& omega, double lambda);
// H(f|omega_2) <= I(f|omega_2)
InequalityCheck classical_lsi_check(const DensitySample& f);

}  // namespace stablelab
