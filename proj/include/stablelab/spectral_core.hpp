#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "stablelab/grid.hpp"
#include "stablelab/spectral_model.hpp"

namespace stablelab {

using cplx = std::complex<double>;

inline constexpr double kDefaultMassTol = 1e-6;
inline constexpr double kClampCeiling = 1e-8;

// Real samples on a grid. When `model` is set the samples are exact values of
// the inverse transform of that spectrum (aliasing and periodic images removed).
struct RealField {
    Grid grid;
    std::vector<double> values;
    ModelPtr model;
    Parity parity = Parity::Even;
};

struct DensitySample {
    Grid grid;
    std::vector<double> values;
    double clamped_mass = 0.0;
    ModelPtr model;

    // trapezoid mass on [-L, L)
    double trapezoid_mass() const;
    // trapezoid mass plus the analytic tail beyond +-L when the model has one
    double mass() const;
    // throws NumericError/ConfigError when an invariant fails
    void validate(double mass_tol = kDefaultMassTol) const;
    RealField as_field() const { return RealField{grid, values, model, Parity::Even}; }
};

struct SpectralDensity {
    Grid grid;
    std::vector<cplx> values;
    ModelPtr model;

    void validate(double tol = 1e-10) const;
};

// f^(xi_k) = int e^{-i xi x} f dx
SpectralDensity forward_transform(const DensitySample& f);
SpectralDensity forward_transform(const RealField& f);
// inverse with Hermitian check, clamping of negative ringing
DensitySample inverse_transform(const SpectralDensity& g);
// inverse without clamping (derivatives and other signed fields)
RealField inverse_transform_field(const SpectralDensity& g, Parity parity);

SpectralDensity sample_spectrum(const Grid& grid, const ModelPtr& model);
// exact samples of the inverse transform of `model` on the grid
std::vector<double> synthesize(const Grid& grid, const ModelPtr& model, double* imag_residue = nullptr);

SpectralDensity convolve(const SpectralDensity& f, const SpectralDensity& g);
SpectralDensity scale_density(const SpectralDensity& f, double a);

// trapezoid rule on [-L, L)
double quadrature(const std::vector<double>& values, const Grid& grid);
// trapezoid with Richardson elimination of |x|^{s-1}-type singularities at x = 0;
// uses the nested stride-2, stride-4 sub-grids, one level per exponent
double quadrature_origin(const std::vector<double>& values, const Grid& grid,
                         const std::vector<double>& exponents);

// Richardson exponents for trapezoid sums of a field synthesized from `model`:
// an even high-frequency term |xi|^-p puts |x|^{p-1} at the origin, costing h^p
std::vector<double> origin_exponents(const ModelPtr& model, std::size_t max_count = 3);

// pair sum S(p,q,+-) = sum_{m >= m0} (m+q)^{-p} +- (m-q)^{-p}, |q| <= 1/2
double pair_sum(double p, double q, Parity parity, long m0 = 1);

// value at x -> 0+ of an odd field whose spectrum has a jump term i sgn/|xi|
std::optional<double> right_limit_at_origin(const RealField& f);

}  // namespace stablelab
