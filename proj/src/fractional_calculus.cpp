#include "stablelab/fractional_calculus.hpp"

#include <algorithm>
#include <cmath>

#include "stablelab/errors.hpp"

namespace stablelab {

FractionalOrder::FractionalOrder(double nu) : nu(nu)
{
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("fractional order must lie in (0, 1)");
}

cplx riesz_symbol(double xi, double nu)
{
    if (xi == 0.0) return 0.0;
    return cplx(0.0, (xi > 0 ? 1.0 : -1.0) * std::pow(std::abs(xi), nu));
}

RealField riesz_derivative_field(const RealField& f, double nu)
{
    if (!(nu > 0.0)) throw DomainError("derivative order must be positive");
    Parity out_parity = f.parity == Parity::Even ? Parity::Odd : Parity::Even;
    RealField out = [&] {
        if (f.model) {
            auto m = riesz_multiplied(f.model, nu);
            return RealField{f.grid, synthesize(f.grid, m), m, out_parity};
        }
        SpectralDensity s = forward_transform(f);
        for (std::size_t k = 0; k < s.values.size(); ++k) s.values[k] *= riesz_symbol(f.grid.xi(k), nu);
        return inverse_transform_field(s, out_parity);
    }();
    // exact zero of an odd field (midpoint of a jump)
    if (out_parity == Parity::Odd) out.values[f.grid.origin()] = 0.0;
    return out;
}

RealField riesz_derivative(const DensitySample& f, FractionalOrder nu)
{
    return riesz_derivative_field(f.as_field(), nu.nu);
}

RealField classical_derivative(const DensitySample& f) { return riesz_derivative_field(f.as_field(), 1.0); }

RealField stable_derivative(const DensitySample& f, double lambda)
{
    if (!(lambda > 1.0 && lambda <= 2.0)) throw DomainError("stable index must lie in (1, 2]");
    return riesz_derivative_field(f.as_field(), lambda - 1.0);
}

double density_floor(const DensitySample& f, double factor)
{
    double mx = *std::max_element(f.values.begin(), f.values.end());
    return factor * mx;
}

Score score_from(const RealField& numerator, const DensitySample& f, double floor_factor)
{
    require_same_grid(numerator.grid, f.grid, "score");
    Score s;
    s.floor = density_floor(f, floor_factor);
    const std::size_t N = f.grid.n();
    s.values.assign(N, 0.0);
    s.mask.assign(N, 0);
    std::size_t used = 0;
    for (std::size_t j = 0; j < N; ++j) {
        if (f.values[j] >= s.floor && f.values[j] > 0.0) {
            s.mask[j] = 1;
            s.values[j] = numerator.values[j] / f.values[j];
            ++used;
        }
    }
    if (used == 0) throw DegenerateDensityError("every node is below the density floor");
    s.masked_fraction = 1.0 - static_cast<double>(used) / static_cast<double>(N);
    return s;
}

Score fractional_score(const DensitySample& f, FractionalOrder nu, double floor_factor)
{
    return score_from(riesz_derivative(f, nu), f, floor_factor);
}

Score classical_score(const DensitySample& f, double floor_factor)
{
    return score_from(classical_derivative(f), f, floor_factor);
}

}  // namespace stablelab
