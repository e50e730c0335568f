#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <nlohmann/json.hpp>

#include "doctest.h"
#include "stablelab/clt_cascade.hpp"
#include "stablelab/errors.hpp"
#include "stablelab/stable_densities.hpp"

using namespace stablelab;

namespace {

const Grid& default_grid()
{
    static Grid g(1 << 16, 200.0);
    return g;
}

SpectralDensity linnik_hat(double lambda) { return linnik_density_fourier(StableLawSpec(lambda), default_grid()).second; }
SpectralDensity levy_hat(double lambda) { return levy_density(StableLawSpec(lambda), default_grid()).second; }

double sup_diff(const SpectralDensity& a, const SpectralDensity& b)
{
    double e = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) e = std::max(e, std::abs(a.values[k] - b.values[k]));
    return e;
}

bool passed(const SweepResult& s, const std::string& name, int& count)
{
    bool ok = true;
    count = 0;
    for (const auto& c : s.ratio_checks)
        if (c.name == name) {
            ++count;
            ok = ok && c.pass;
        }
    return ok;
}

}  // namespace

TEST_CASE("normalized sums")
{
    const Grid& g = default_grid();
    SpectralDensity p = linnik_hat(1.5);
    CHECK(sup_diff(normalized_sum_spectrum(p, 1, 1.5), p) == 0.0);
    for (double lambda : {1.2, 1.5, 1.8}) {
        SpectralDensity w = levy_hat(lambda);
        for (int n : {2, 3, 17, 64}) CHECK(sup_diff(normalized_sum_spectrum(w, n, lambda), w) < 1e-14);
    }
    for (int n : {2, 8, 64}) CHECK(std::abs(normalized_sum_spectrum(p, n, 1.5).values[0] - 1.0) < 1e-14);

    // T_2 at the origin: (1/pi) int_0^inf (1 + xi^1.5 / 2)^{-2} dxi
    boost::math::quadrature::exp_sinh<double> es;
    double f0 = es.integrate([](double xi) { return std::pow(1.0 + std::pow(xi, 1.5) / 2.0, -2.0); }) / M_PI;
    DensitySample t2 = normalized_sum_density(p, 2, 1.5);
    CHECK(std::abs(t2.values[g.origin()] - f0) < 1e-10);

    // grid route through interpolated dilation; the kink error is raised to the n-th power
    SpectralDensity plain = p;
    plain.model.reset();
    CHECK(sup_diff(normalized_sum_spectrum(plain, 8, 1.5), normalized_sum_spectrum(p, 8, 1.5)) < 1e-3);

    DensitySample w = reference_density(1.5, g);
    CHECK(l1_distance(normalized_sum_density(p, 64, 1.5), w) < l1_distance(normalized_sum_density(p, 8, 1.5), w));
    CHECK_THROWS_AS(normalized_sum_spectrum(p, 0, 1.5), DomainError);
    CHECK_THROWS_AS(CascadeSpec(p, 2.0, 8), DomainError);
    CHECK_THROWS_AS(CascadeSpec(p, 1.5, 1), ConfigError);
}

TEST_CASE("log-log slope")
{
    std::vector<int> n{1, 2, 4, 8, 16, 32};
    std::vector<double> v;
    for (int m : n) v.push_back(3.0 * std::pow(m, -0.7));
    CHECK(loglog_slope(n, v) == doctest::Approx(-0.7).epsilon(1e-12));
    v[0] = 100.0;  // n < 4 is excluded
    CHECK(loglog_slope(n, v) == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("fractional Fisher information along the cascade")
{
    CascadeSpec spec(linnik_hat(1.5), 1.5, 16);
    SweepResult s = fisher_monotonicity_sweep(spec);
    int steps = 0, cum = 0;
    CHECK(passed(s, "step_ratio", steps));
    CHECK(steps == 15);
    CHECK(passed(s, "cumulative_rate", cum));
    CHECK(cum == 15);
    CHECK(s.all_pass());
    for (std::size_t i = 1; i < s.values.size(); ++i) CHECK(s.values[i] <= s.values[i - 1] + 1e-7);

    // exact information of T_2 against the two-fold Blachman-Stam construction
    InequalityCheck bs = blachman_stam_check(spec.base, spec.base, 0.5, 1.5);
    CHECK(std::abs(bs.lhs - s.values[1]) < 1e-10);

    SweepResult w = fisher_monotonicity_sweep(CascadeSpec(levy_hat(1.5), 1.5, 8));
    for (double v : w.values) CHECK(std::abs(v) < 1e-8);
    CHECK(w.all_pass());
}

TEST_CASE("rate of the cascade")
{
    // (1 + |xi|^lambda/n)^{-n} = e^{-|xi|^lambda}(1 + |xi|^{2 lambda}/(2n) + ...) so I_lambda(T_n) ~ n^{-2}
    SweepResult s = fisher_monotonicity_sweep(CascadeSpec(linnik_hat(1.5), 1.5, 64));
    CHECK(s.rate_fit <= -1.0 / 3.0 + 0.05);
    CHECK(std::abs(s.rate_fit + 2.0) < 0.1);
    CHECK(s.all_pass());
}

TEST_CASE("Blachman-Stam inequality")
{
    for (double lambda : {1.2, 1.5, 1.8}) {
        SpectralDensity f = linnik_hat(lambda), w = levy_hat(lambda);
        double i_f = fractional_relative_fisher(inverse_transform(f), lambda);
        for (double eps : {0.1, 0.5, 0.9}) {
            CHECK(blachman_stam_check(f, f, eps, lambda).pass);
            InequalityCheck a = blachman_stam_check(f, w, eps, lambda);
            CHECK(a.pass);
            CHECK(a.lhs <= std::pow(eps, 2.0 / lambda) * i_f + 1e-5);
            InequalityCheck b = blachman_stam_check(w, f, eps, lambda);
            CHECK(b.lhs <= std::pow(1.0 - eps, 2.0 / lambda) * i_f + 1e-5);
        }
        InequalityCheck z = blachman_stam_check(w, w, 0.3, lambda);
        CHECK(std::abs(z.lhs) < 1e-8);
        CHECK(std::abs(z.rhs) < 1e-8);
    }
    SpectralDensity gauss = sample_spectrum(default_grid(), gaussian_model(1.0));
    CHECK_THROWS_AS(blachman_stam_check(gauss, linnik_hat(1.5), 0.5, 1.5), InapplicableInputError);
    CHECK_THROWS_AS(blachman_stam_check(linnik_hat(1.5), linnik_hat(1.5), 1.0, 1.5), DomainError);
}

TEST_CASE("entropy decay and Csiszar-Kullback")
{
    CascadeSpec spec(linnik_hat(1.5), 1.5, 64);
    SweepResult s = entropy_decay_sweep(spec);
    REQUIRE(s.n_values.size() == 7);
    int c = 0;
    CHECK(passed(s, "log_sobolev_chain", c));
    CHECK(c == 7);
    CHECK(passed(s, "csiszar_kullback", c));
    CHECK(c == 7);
    CHECK(s.rate_fit <= -1.0 / 6.0 + 0.05);
    CHECK(s.values.back() < 1e-4);

    SweepResult w = entropy_decay_sweep(CascadeSpec(levy_hat(1.5), 1.5, 16));
    for (double v : w.values) CHECK(std::abs(v) < 1e-8);
    CHECK(w.all_pass());
}

TEST_CASE("interpolation constant")
{
    // C_k^2 = min_R R^{2k+1}/(pi (2k+1)) + R^{-2} for unit L1 and H^{k+1} norms
    for (int k = 0; k <= 3; ++k) {
        auto phi = [k](double R) { return std::pow(R, 2 * k + 1) / (M_PI * (2 * k + 1)) + 1.0 / (R * R); };
        auto r = boost::math::tools::brent_find_minima(phi, 1e-3, 1e3, 60);
        CHECK(interpolation_constant(k) == doctest::Approx(std::sqrt(r.second)).epsilon(1e-10));
    }
    // direct check on a Gaussian difference
    const Grid& g = default_grid();
    DensitySample a = gaussian_density(1.0, g), b = gaussian_density(1.7, g);
    SpectralDensity d{g, std::vector<cplx>(g.n()), linear_combination(1.0, a.model, -1.0, b.model)};
    for (std::size_t k = 0; k < g.n(); ++k) d.values[k] = (*d.model)(g.xi(k));
    for (int k = 0; k <= 2; ++k) {
        double p = 2.0 * k + 3.0;
        double rhs = interpolation_constant(k) * std::pow(l1_distance(a, b), 2.0 / p) *
                     std::pow(sobolev_norm(d, k + 1, true), (2.0 * k + 1.0) / p);
        CHECK(sobolev_norm(d, k, true) <= rhs);
    }
}

TEST_CASE("Sobolev convergence")
{
    CascadeSpec spec(linnik_hat(1.5), 1.5, 64);
    for (int k = 0; k <= 2; ++k) {
        SobolevSweep s = sobolev_convergence_sweep(spec, k);
        CHECK(s.sweep.all_pass());
        CHECK(s.limsup_estimate <= 1.02);
        CHECK(s.limsup_estimate >= 0.98);
        // |f_n^| ~ |xi|^{-n lambda}, so f_n lies in H^k iff 2 n lambda - 2k > 1
        int n0 = 1;
        while (!(2.0 * n0 * 1.5 - 2.0 * k > 1.0)) ++n0;
        CHECK(s.first_finite_n == n0);
    }
    SobolevSweep l12 = sobolev_convergence_sweep(CascadeSpec(linnik_hat(1.2), 1.2, 16), 2);
    CHECK(l12.first_finite_n == 3);
    CHECK(std::isinf(l12.ratios[1]));

    SobolevSweep w = sobolev_convergence_sweep(CascadeSpec(levy_hat(1.5), 1.5, 16), 1);
    for (double v : w.sweep.values) CHECK(v < 1e-12);
    CHECK(w.limsup_estimate == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(sobolev_convergence_sweep(spec, 3), DomainError);
}

TEST_CASE("TV bound on Fisher information")
{
    const Grid& g = default_grid();
    InequalityCheck c = tv_fisher_bound_check(gaussian_density(1.0, g));
    CHECK(std::abs(c.lhs - 1.0 / 3.0) < 1e-8);
    CHECK(std::abs(c.rhs - 3.0 / M_PI) < 1e-8);
    CHECK(c.pass);
    CHECK(tv_fisher_bound_check(linnik_density_fourier(StableLawSpec(1.5), g).first).pass);
    CHECK(tv_fisher_bound_check(laplace_density(g)).pass);
}

TEST_CASE("full sweep")
{
    CascadeSpec spec(linnik_hat(1.5), 1.5, 16);
    SweepResult s = cascade_sweep(spec, default_sweep_n(16));
    REQUIRE(s.rows.size() == 12);
    CHECK(s.n_values == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16});
    CHECK(s.all_pass());
    for (std::size_t i = 1; i < s.rows.size(); ++i) CHECK(s.rows[i].I_lambda <= s.rows[i - 1].I_lambda);
    int tv = 0;
    CHECK(passed(s, "tv_fisher", tv));
    CHECK(tv == 10);

    // frequency-side oracle for the L2 column at n = 1
    boost::math::quadrature::exp_sinh<double> es;
    double l2 = es.integrate([](double xi) {
        double d = 1.0 / (1.0 + std::pow(xi, 1.5)) - std::exp(-std::pow(xi, 1.5));
        return d * d;
    });
    CHECK(std::abs(std::sqrt(l2 / M_PI) - s.rows[0].hk0) < 1e-9);

    std::string csv = sweep_csv(s);
    CHECK(csv.rfind("n,H_rel,I,I_lambda,l1,tv,hk0,hk1,bound_ratio,pass\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
    CHECK(csv == sweep_csv(cascade_sweep(spec, default_sweep_n(16))));

    auto j = nlohmann::json::parse(sweep_summary_json(s));
    CHECK(j["all_pass"] == true);
    CHECK(j["checks"].size() == s.ratio_checks.size());
}
