#pragma once

#include <utility>
#include <vector>

#include "stablelab/spectral_core.hpp"

namespace stablelab {

struct StableLawSpec {
    double lambda;
    explicit StableLawSpec(double lambda);
};

// c = Gamma(lambda) sin(pi lambda / 2) / pi; tails behave like lambda c |x|^{-lambda-1}
double tail_constant(double lambda);

// spectra
ModelPtr levy_model(double lambda);       // exp(-|xi|^lambda), any lambda in (0, 2]
ModelPtr gaussian_model(double sigma);    // exp(-sigma xi^2 / 2), sigma = variance
ModelPtr linnik_model(double lambda);     // 1 / (1 + |xi|^lambda)

std::pair<DensitySample, SpectralDensity> levy_density(const StableLawSpec& spec, const Grid& grid);
DensitySample gaussian_density(double sigma, const Grid& grid);
std::pair<DensitySample, SpectralDensity> linnik_density_fourier(const StableLawSpec& spec,
                                                                 const Grid& grid);
// e^{-|x|}/2, the lambda = 2 Linnik law
DensitySample laplace_density(const Grid& grid);

// g(s, a, b) = (b/pi) sin(pi a/b) s^{a-1} / (1 + s^{2a} + 2 s^a cos(pi a/b))
double mixture_weight(double s, double a, double b);
// p(x) = int_0^inf (s/2) e^{-s|x|} g(s, lambda, 2) ds, computed pointwise
DensitySample linnik_mixture_density(const StableLawSpec& spec, const Grid& grid);
double linnik_mixture_value(double lambda, double x);

struct TailDiagnostic {
    double lambda;
    std::vector<double> probes;
    std::vector<double> measured;   // |x|^{lambda+1} f(x)
    std::vector<double> rel_errors;
    double measured_limit;          // value at the farthest probe
    double theoretical;             // lambda c
    double rel_error;               // at the farthest probe
    bool member;                    // rel_error < 25%
};

std::vector<double> default_tail_probes(const Grid& grid);
TailDiagnostic tail_diagnostic(const DensitySample& f, double lambda, const std::vector<double>& probes);

// local 8-point interpolation of grid samples at x
double interpolate(const std::vector<double>& values, const Grid& grid, double x);

}  // namespace stablelab
