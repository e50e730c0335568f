#pragma once

#include <array>
#include <string>
#include <vector>

#include "stablelab/fractional_calculus.hpp"

namespace stablelab {

// A functional value with its bookkeeping. value is +inf when the integral
// diverges (at the origin, in the tails, or by the analytic tail test).
struct Measured {
    double value = 0.0;
    double tail = 0.0;           // contribution from |x| > L
    double tail_error_bound = 0.0;
    double excluded_mass = 0.0;  // mass of f on nodes excluded by masking
    bool divergent = false;
};

Measured shannon_entropy_detail(const DensitySample& f, double floor_factor = kFloorFactor);
Measured relative_entropy_detail(const DensitySample& f, const DensitySample& g,
                                 double floor_factor = kFloorFactor);
Measured fisher_information_detail(const DensitySample& f, double floor_factor = kFloorFactor);
Measured relative_fisher_detail(const DensitySample& f, const DensitySample& g,
                                double floor_factor = kFloorFactor);
// int (D_{lambda-1} f / f + x/(lambda upsilon))^2 f
Measured fractional_relative_fisher_detail(const DensitySample& f, double lambda, double upsilon = 1.0,
                                           double floor_factor = kFloorFactor);
// int (D_{lambda-1} f / f - D_{lambda-1} w / w)^2 f, numerical reference score
Measured fractional_relative_fisher_two_score(const DensitySample& f, const DensitySample& omega,
                                              double lambda, double floor_factor = kFloorFactor);
Measured entropy_production_detail(const DensitySample& f, const DensitySample& omega, double lambda,
                                   double floor_factor = kFloorFactor);
Measured l1_distance_detail(const DensitySample& f, const DensitySample& g);

double shannon_entropy(const DensitySample& f);
double relative_entropy(const DensitySample& f, const DensitySample& g);
double fisher_information(const DensitySample& f);
double relative_fisher(const DensitySample& f, const DensitySample& g);
double fractional_relative_fisher(const DensitySample& f, double lambda, double upsilon = 1.0);
double entropy_production(const DensitySample& f, const DensitySample& omega, double lambda);
double l1_distance(const DensitySample& f, const DensitySample& g);

// discrete variation sum |f_{j+1} - f_j| plus the monotone tails beyond +-L
double tv_norm(const DensitySample& f);

// sqrt((1/2pi) int w(xi) |f^|^2), w = |xi|^{2k} (homogeneous) or (1 + xi^2)^k
double sobolev_norm(const DensitySample& f, int k, bool homogeneous);
double sobolev_norm(const SpectralDensity& f, int k, bool homogeneous);

struct MomentResult {
    double value;
    bool divergent;
};
MomentResult moment(const DensitySample& f, double order);

struct Con23Result {
    double value;      // int |f^|^M (1 + xi^2)^k dxi over R (partial sum if not converged)
    bool converged;
    double ratio;      // increment ratio of the last two octave panels
};
Con23Result con23_checker(const SpectralDensity& f, double M, int k);

struct FunctionalReport {
    double shannon = 0.0;
    double rel_entropy = 0.0;
    double fisher = 0.0;
    double rel_fisher = 0.0;
    double frac_fisher_lambda = 0.0;
    double entropy_production = 0.0;
    double tv = 0.0;
    std::array<double, 5> sobolev{};  // homogeneous, k = 0..4
    double l1 = 0.0;
    double masked_fraction = 0.0;
    double tail_error_bound = 0.0;

    // flat JSON object; infinite values are written as null
    std::string to_json() const;
};

// all functionals of f against the order-lambda reference omega
FunctionalReport functional_report(const DensitySample& f, const DensitySample& omega, double lambda);

}  // namespace stablelab
