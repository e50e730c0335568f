#pragma once

#include <vector>

#include "stablelab/spectral_core.hpp"

namespace stablelab {

struct FractionalOrder {
    double nu;
    explicit FractionalOrder(double nu);
};

inline constexpr double kFloorFactor = 1e-12;

// i sgn(xi) |xi|^nu, zero at xi = 0
cplx riesz_symbol(double xi, double nu);

// D_nu f: inverse transform of i sgn(xi)|xi|^nu f^(xi)
RealField riesz_derivative(const DensitySample& f, FractionalOrder nu);
// same multiplier for any nu > 0 on any real field (nu = 1 is d/dx)
RealField riesz_derivative_field(const RealField& f, double nu);
RealField classical_derivative(const DensitySample& f);
// D_{lambda-1} for lambda in (1, 2], with lambda = 2 meaning d/dx
RealField stable_derivative(const DensitySample& f, double lambda);

struct Score {
    std::vector<double> values;  // 0 at masked nodes
    std::vector<char> mask;      // 1 where f >= floor
    double floor;
    double masked_fraction;
};

double density_floor(const DensitySample& f, double factor = kFloorFactor);
Score score_from(const RealField& numerator, const DensitySample& f, double floor_factor = kFloorFactor);
// D_nu f / f
Score fractional_score(const DensitySample& f, FractionalOrder nu, double floor_factor = kFloorFactor);
// f' / f
Score classical_score(const DensitySample& f, double floor_factor = kFloorFactor);

}  // namespace stablelab
