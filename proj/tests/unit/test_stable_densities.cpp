#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

#include "doctest.h"
#include "stablelab/errors.hpp"
#include "stablelab/stable_densities.hpp"

using namespace stablelab;

namespace {

const Grid& default_grid()
{
    static Grid g(1 << 16, 200.0);
    return g;
}

double evenness_defect(const DensitySample& d)
{
    double m = 0.0;
    for (std::size_t j = 1; j < d.grid.n(); ++j) m = std::max(m, std::abs(d.values[j] - d.values[d.grid.mirror(j)]));
    return m;
}

}  // namespace

TEST_CASE("stable index validation")
{
    CHECK_THROWS_AS(StableLawSpec(1.0), DomainError);
    CHECK_THROWS_AS(StableLawSpec(0.7), DomainError);
    CHECK_THROWS_AS(StableLawSpec(2.1), DomainError);
    CHECK_NOTHROW(StableLawSpec(2.0));
    CHECK(tail_constant(1.5) == doctest::Approx(std::tgamma(1.5) * std::sin(0.75 * M_PI) / M_PI));
    CHECK(tail_constant(1.2) > 0);
}

TEST_CASE("Levy densities")
{
    const Grid& g = default_grid();
    auto [w2, s2] = levy_density(StableLawSpec(2.0), g);
    double err = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j)
        err = std::max(err, std::abs(w2.values[j] - std::exp(-g.x(j) * g.x(j) / 4) / std::sqrt(4 * M_PI)));
    CHECK(err < 1e-9);

    auto [w, s] = levy_density(StableLawSpec(1.5), g);
    double lc = 1.5 * tail_constant(1.5);
    CHECK(std::abs(std::pow(50.0, 2.5) * interpolate(w.values, g, 50.0) / lc - 1) < 0.05);
    CHECK(std::abs(w.mass() - 1) < 1e-6);
    CHECK(std::abs(w.trapezoid_mass() - 1) > 1e-4);  // the tail matters
    CHECK(evenness_defect(w) < 1e-10);
    CHECK(w.clamped_mass < 1e-8);
    CHECK_NOTHROW(w.validate());
    // unimodal at 0
    for (std::size_t j = g.origin(); j + 1 < g.n(); ++j) REQUIRE(w.values[j + 1] <= w.values[j] + 1e-10);
    // spectrum is exact
    for (std::size_t k = 0; k < g.n(); k += 97)
        CHECK(s.values[k].real() == std::exp(-std::pow(std::abs(g.xi(k)), 1.5)));
}

TEST_CASE("Levy semigroup on spectra")
{
    const Grid& g = default_grid();
    for (std::size_t k = 0; k < g.n(); k += 31) {
        double a = std::pow(std::abs(g.xi(k)), 1.5);
        CHECK(std::abs(std::exp(-a * 0.3) * std::exp(-a * 0.9) - std::exp(-a * 1.2)) <= 8e-16 * (1 + 1.2 * a) * std::exp(-a * 1.2));
    }
}

TEST_CASE("Gaussian densities")
{
    const Grid& g = default_grid();
    auto d = gaussian_density(1.0, g);
    CHECK(d.values[g.origin()] == doctest::Approx(1 / std::sqrt(2 * M_PI)).epsilon(1e-15));
    CHECK(std::abs(d.mass() - 1) < 1e-12);
    auto w = levy_density(StableLawSpec(2.0), g).first;
    auto d2 = gaussian_density(2.0, g);
    double err = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) err = std::max(err, std::abs(w.values[j] - d2.values[j]));
    CHECK(err < 1e-9);
    CHECK_THROWS_AS(gaussian_density(0.0, g), DomainError);
    CHECK_THROWS_AS(gaussian_density(-1.0, g), DomainError);
}

TEST_CASE("Linnik densities by Fourier inversion")
{
    const Grid& g = default_grid();
    auto lap = linnik_density_fourier(StableLawSpec(2.0), g).first;
    double err = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) err = std::max(err, std::abs(lap.values[j] - 0.5 * std::exp(-std::abs(g.x(j)))));
    CHECK(err < 1e-6);

    auto [p, s] = linnik_density_fourier(StableLawSpec(1.5), g);
    CHECK(s.values[0] == cplx(1.0, 0.0));
    CHECK((*s.model)(1.0).real() == 0.5);
    double lc = 1.5 * tail_constant(1.5);
    CHECK(std::abs(std::pow(80.0, 2.5) * interpolate(p.values, g, 80.0) / lc - 1) < 0.10);
    CHECK(std::abs(p.mass() - 1) < 1e-6);
    // exact value at the origin: 1 / (lambda sin(pi / lambda))
    CHECK(std::abs(p.values[g.origin()] - 1 / (1.5 * std::sin(M_PI / 1.5))) < 1e-9);

    for (double lam : {1.2, 1.5, 1.8}) {
        auto q = linnik_density_fourier(StableLawSpec(lam), g).first;
        CHECK(evenness_defect(q) < 1e-10);
        bool mono = true, convex = true;
        for (std::size_t j = g.origin(); j + 2 < g.n(); ++j) {
            if (q.values[j + 1] > q.values[j] + 1e-10) mono = false;
            if (q.values[j + 2] - 2 * q.values[j + 1] + q.values[j] < -1e-10) convex = false;
        }
        CHECK(mono);
        CHECK(convex);
    }
}

TEST_CASE("mixture weight and mixture route")
{
    boost::math::quadrature::exp_sinh<double> es;
    for (double lam : {1.2, 1.5, 1.8}) {
        double m = es.integrate([&](double s) { return mixture_weight(s, lam, 2.0); });
        CHECK(std::abs(m - 1) < 1e-8);
    }
    const Grid& g = default_grid();
    for (double lam : {1.2, 1.5, 1.8}) {
        CAPTURE(lam);
        auto mix = linnik_mixture_density(StableLawSpec(lam), g);
        auto four = linnik_density_fourier(StableLawSpec(lam), g).first;
        double err = 0.0, err50 = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j) {
            double e = std::abs(mix.values[j] - four.values[j]);
            err = std::max(err, e);
            if (std::abs(g.x(j)) <= 50) err50 = std::max(err50, e);
        }
        CHECK(err50 < 1e-6);
        CHECK(err < 1e-6);
    }
    // Laplace limit
    double prev = 1.0;
    for (double lam : {1.9, 1.99, 1.999, 1.9999}) {
        double d = std::abs(linnik_mixture_value(lam, 1.0) - 0.5 * std::exp(-1.0));
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-4);
    CHECK(std::abs(linnik_mixture_value(1.5, 0.7) - interpolate(linnik_mixture_density(StableLawSpec(1.5), g).values, g, 0.7)) < 1e-9);
    CHECK_THROWS_AS(linnik_mixture_density(StableLawSpec(2.0), g), DomainError);
}

TEST_CASE("tail diagnostics")
{
    const Grid& g = default_grid();
    auto w = levy_density(StableLawSpec(1.5), g).first;
    auto t = tail_diagnostic(w, 1.5, {40, 80, 160});
    CHECK(t.rel_errors[0] > t.rel_errors[1]);
    CHECK(t.rel_errors[1] > t.rel_errors[2]);
    CHECK(t.rel_error < 0.05);
    CHECK(t.member);
    CHECK(t.theoretical == doctest::Approx(1.5 * tail_constant(1.5)));

    auto gs = gaussian_density(1.0, g);
    auto tg = tail_diagnostic(gs, 1.5, default_tail_probes(g));
    CHECK(tg.measured_limit < 1e-100);
    CHECK_FALSE(tg.member);

    auto p = linnik_density_fourier(StableLawSpec(1.5), g).first;
    CHECK(tail_diagnostic(p, 1.5, {160}).rel_error < 0.10);
    CHECK_THROWS_AS(tail_diagnostic(p, 1.5, {250}), RangeError);
}
