#include <cmath>

#include "doctest.h"
#include "stablelab/errors.hpp"
#include "stablelab/fractional_calculus.hpp"
#include "stablelab/stable_densities.hpp"

using namespace stablelab;

namespace {

const Grid& default_grid()
{
    static Grid g(1 << 16, 200.0);
    return g;
}

DensitySample plain(DensitySample d)
{
    d.model.reset();
    return d;
}

}  // namespace

TEST_CASE("order validation")
{
    CHECK_THROWS_AS(FractionalOrder(0.0), DomainError);
    CHECK_THROWS_AS(FractionalOrder(1.0), DomainError);
    CHECK_THROWS_AS(FractionalOrder(-0.2), DomainError);
    CHECK(riesz_symbol(0.0, 0.5) == cplx(0.0, 0.0));
    CHECK(riesz_symbol(4.0, 0.5).imag() == doctest::Approx(2.0));
    CHECK(riesz_symbol(-4.0, 0.5).imag() == doctest::Approx(-2.0));
}

TEST_CASE("score identity for Levy densities")
{
    const Grid& g = default_grid();
    for (double lambda : {1.2, 1.5, 1.8}) {
        auto [w, s] = levy_density(StableLawSpec(lambda), g);
        RealField d = riesz_derivative(w, FractionalOrder(lambda - 1.0));
        double sup = 0.0, sup20 = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j) {
            double r = std::abs(d.values[j] + g.x(j) / lambda * w.values[j]);
            sup = std::max(sup, r);
            if (std::abs(g.x(j)) <= 20.0) sup20 = std::max(sup20, r);
        }
        CHECK(sup20 < 1e-5);
        if (lambda == 1.5) CHECK(sup < 1e-6);

        Score sc = fractional_score(w, FractionalOrder(lambda - 1.0));
        double se = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j)
            if (sc.mask[j] && std::abs(g.x(j)) <= 20.0) se = std::max(se, std::abs(sc.values[j] + g.x(j) / lambda));
        CHECK(se < 1e-5);
    }
    // the plain DFT route agrees with the model route
    auto [w, s] = levy_density(StableLawSpec(1.5), g);
    RealField a = riesz_derivative(w, FractionalOrder(0.5));
    RealField b = riesz_derivative(plain(w), FractionalOrder(0.5));
    double m = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j)
        if (std::abs(g.x(j)) <= 20.0) m = std::max(m, std::abs(a.values[j] - b.values[j]));
    // the plain DFT carries the periodic images of the x^{-5/2} tails
    CHECK(m < 2e-5);
}

TEST_CASE("classical limit and parity")
{
    const Grid& g = default_grid();
    DensitySample f = gaussian_density(2.0, g);
    RealField d = riesz_derivative(f, FractionalOrder(0.999));
    double e = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) e = std::max(e, std::abs(d.values[j] + 0.5 * g.x(j) * f.values[j]));
    CHECK(e < 1e-2);

    DensitySample bump = plain(gaussian_density(0.01, g));
    RealField db = riesz_derivative(bump, FractionalOrder(0.5));
    double odd = 0.0;
    for (std::size_t j = 1; j < g.n(); ++j) odd = std::max(odd, std::abs(db.values[j] + db.values[g.mirror(j)]));
    CHECK(odd < 1e-9);
    CHECK(db.parity == Parity::Odd);
}

TEST_CASE("Linnik fractional score")
{
    const Grid& g = default_grid();
    auto [p, s] = linnik_density_fourier(StableLawSpec(1.5), g);
    Score sc = fractional_score(p, FractionalOrder(0.5));
    CHECK(sc.masked_fraction < 0.02);
    CHECK(sc.values[g.origin()] == 0.0);
    double odd = 0.0, scale = 0.0;
    for (std::size_t j = 1; j < g.n(); ++j) {
        if (!sc.mask[j]) continue;
        CHECK(sc.mask[g.mirror(j)]);
        odd = std::max(odd, std::abs(sc.values[j] + sc.values[g.mirror(j)]));
        scale = std::max(scale, std::abs(sc.values[j]));
    }
    CHECK(odd < 1e-9 * std::max(1.0, scale));
}

TEST_CASE("classical scores")
{
    const Grid& g = default_grid();
    for (double sigma : {0.5, 1.0, 3.0}) {
        DensitySample f = gaussian_density(sigma, g);
        Score sc = classical_score(f);
        // an FFT derivative carries ~1e-17 absolute error, so the score error grows like 1/f
        double e = 0.0, scaled = 0.0, odd = 0.0;
        double fm = f.values[g.origin()];
        for (std::size_t j = 0; j < g.n(); ++j) {
            if (!sc.mask[j]) continue;
            double r = std::abs(sc.values[j] + g.x(j) / sigma);
            scaled = std::max(scaled, r * f.values[j] / fm);
            if (f.values[j] >= 1e-9 * fm) e = std::max(e, r);
            if (j > 0 && f.values[j] >= 1e-9 * fm) odd = std::max(odd, std::abs(sc.values[j] + sc.values[g.mirror(j)]));
        }
        CHECK(e < 1e-7);
        CHECK(odd < 1e-7);
        CHECK(scaled < 1e-15);
    }
    DensitySample lap = laplace_density(g);
    Score sc = classical_score(lap);
    double e = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) {
        double x = g.x(j);
        if (!sc.mask[j] || std::abs(x) < 3.0 * g.dx()) continue;
        e = std::max(e, std::abs(sc.values[j] + (x > 0 ? 1.0 : -1.0)));
    }
    CHECK(e < 1e-3);

    DensitySample zero{g, std::vector<double>(g.n(), 0.0), 0.0, nullptr};
    CHECK_THROWS_AS(classical_score(zero), DegenerateDensityError);
}

TEST_CASE("multiplier composition")
{
    const Grid& g = default_grid();
    ModelPtr m = linnik_model(1.5);
    for (double nu1 : {0.2, 0.5, 0.8}) {
        for (double nu2 : {0.3, 0.6}) {
            SpectralDensity a = sample_spectrum(g, abs_power_multiplied(riesz_multiplied(m, nu1), nu2));
            SpectralDensity b = sample_spectrum(g, riesz_multiplied(m, nu1 + nu2));
            double e = 0.0;
            for (std::size_t k = 0; k < g.n(); ++k) {
                cplx direct = riesz_symbol(g.xi(k), nu1) * std::pow(std::abs(g.xi(k)), nu2) * (*m)(g.xi(k));
                e = std::max(e, std::abs(a.values[k] - b.values[k]));
                e = std::max(e, std::abs(direct - b.values[k]));
            }
            CHECK(e < 1e-10);
        }
    }
}

TEST_CASE("Levy uniqueness from the score ODE")
{
    // D_nu f = -x f/(1+nu) in Fourier form: phi' = i(1+nu) symbol(xi) phi, phi(0) = 1
    // xi = t^5 removes the |xi|^nu kink at the start point
    for (double nu : {0.2, 0.5, 0.8}) {
        auto rhs = [nu](double t, cplx phi) {
            double xi = std::pow(t, 5.0);
            return cplx(0.0, 1.0 + nu) * riesz_symbol(xi, nu) * phi * (5.0 * std::pow(t, 4.0));
        };
        const int steps = 20000;
        const double h = std::pow(5.0, 0.2) / steps;
        cplx phi = 1.0;
        double err = 0.0;
        for (int i = 0; i < steps; ++i) {
            double t = i * h;
            cplx k1 = rhs(t, phi);
            cplx k2 = rhs(t + h / 2, phi + h / 2 * k1);
            cplx k3 = rhs(t + h / 2, phi + h / 2 * k2);
            cplx k4 = rhs(t + h, phi + h * k3);
            phi += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            err = std::max(err, std::abs(phi - std::exp(-std::pow(std::pow(t + h, 5.0), 1.0 + nu))));
        }
        CHECK(err < 1e-6);
    }
}

TEST_CASE("linearity")
{
    const Grid& g = default_grid();
    DensitySample f = plain(gaussian_density(1.0, g));
    DensitySample h = plain(laplace_density(g));
    const double a = 0.3, b = 1.7;
    DensitySample c{g, std::vector<double>(g.n()), 0.0, nullptr};
    for (std::size_t j = 0; j < g.n(); ++j) c.values[j] = a * f.values[j] + b * h.values[j];
    FractionalOrder nu(0.4);
    RealField dc = riesz_derivative(c, nu), df = riesz_derivative(f, nu), dh = riesz_derivative(h, nu);
    double e = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) e = std::max(e, std::abs(dc.values[j] - a * df.values[j] - b * dh.values[j]));
    CHECK(e < 1e-12);

    // model route through the same combination
    DensitySample fm = gaussian_density(1.0, g), hm = laplace_density(g);
    DensitySample cm{g, c.values, 0.0, linear_combination(a, fm.model, b, hm.model)};
    RealField dcm = riesz_derivative(cm, nu), dfm = riesz_derivative(fm, nu), dhm = riesz_derivative(hm, nu);
    e = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j)
        e = std::max(e, std::abs(dcm.values[j] - a * dfm.values[j] - b * dhm.values[j]));
    CHECK(e < 1e-12);
}
