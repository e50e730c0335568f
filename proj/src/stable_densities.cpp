#include "stablelab/stable_densities.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "stablelab/errors.hpp"

namespace stablelab {

StableLawSpec::StableLawSpec(double lambda) : lambda(lambda)
{
    if (!(lambda > 1.0 && lambda <= 2.0)) throw DomainError("stable index must lie in (1, 2]");
}

double tail_constant(double lambda)
{
    return std::tgamma(lambda) * std::sin(M_PI * lambda / 2.0) / M_PI;
}

ModelPtr levy_model(double lambda)
{
    if (!(lambda > 0.0 && lambda <= 2.0)) throw DomainError("stable index must lie in (0, 2]");
    Series low;
    double c = 1.0;
    for (int j = 0; j * lambda <= kLowPowerCap; ++j) {
        if (j > 0) c *= -1.0 / j;
        low.push_back({c, j * lambda, Parity::Even});
    }
    return make_model(
        [lambda](double xi) {
            double a = std::abs(xi);
            return cplx(std::exp(-(lambda == 2.0 ? a * a : std::pow(a, lambda))), 0.0);
        },
        std::move(low), {}, 0.0, true);
}

ModelPtr gaussian_model(double sigma)
{
    if (!(sigma > 0.0)) throw DomainError("Gaussian variance must be positive");
    Series low;
    double c = 1.0;
    for (int j = 0; 2 * j <= kLowPowerCap; ++j) {
        if (j > 0) c *= -sigma / (2.0 * j);
        low.push_back({c, 2.0 * j, Parity::Even});
    }
    return make_model([sigma](double xi) { return cplx(std::exp(-0.5 * sigma * xi * xi), 0.0); },
                      std::move(low), {}, 0.0, true);
}

ModelPtr linnik_model(double lambda)
{
    if (!(lambda > 0.0 && lambda <= 2.0)) throw DomainError("Linnik index must lie in (0, 2]");
    Series low, high;
    for (int j = 0; j * lambda <= kLowPowerCap; ++j)
        low.push_back({(j % 2) ? -1.0 : 1.0, j * lambda, Parity::Even});
    for (int j = 1; j <= 48; ++j) high.push_back({(j % 2) ? 1.0 : -1.0, j * lambda, Parity::Even});
    return make_model(
        [lambda](double xi) {
            double a = std::abs(xi);
            return cplx(1.0 / (1.0 + (lambda == 2.0 ? a * a : std::pow(a, lambda))), 0.0);
        },
        std::move(low), std::move(high), 4.0, false);
}

std::pair<DensitySample, SpectralDensity> levy_density(const StableLawSpec& spec, const Grid& grid)
{
    if (spec.lambda == 2.0) {
        DensitySample d = gaussian_density(2.0, grid);
        d.model = levy_model(2.0);
        return {d, sample_spectrum(grid, d.model)};
    }
    SpectralDensity s = sample_spectrum(grid, levy_model(spec.lambda));
    return {inverse_transform(s), s};
}

DensitySample gaussian_density(double sigma, const Grid& grid)
{
    if (!(sigma > 0.0)) throw DomainError("Gaussian variance must be positive");
    DensitySample d{grid, std::vector<double>(grid.n()), 0.0, gaussian_model(sigma)};
    double norm = 1.0 / std::sqrt(2.0 * M_PI * sigma);
    for (std::size_t j = 0; j < grid.n(); ++j) {
        double x = grid.x(j);
        d.values[j] = norm * std::exp(-x * x / (2.0 * sigma));
    }
    return d;
}

DensitySample laplace_density(const Grid& grid)
{
    DensitySample d{grid, std::vector<double>(grid.n()), 0.0, linnik_model(2.0)};
    for (std::size_t j = 0; j < grid.n(); ++j) d.values[j] = 0.5 * std::exp(-std::abs(grid.x(j)));
    return d;
}

std::pair<DensitySample, SpectralDensity> linnik_density_fourier(const StableLawSpec& spec,
                                                                 const Grid& grid)
{
    if (spec.lambda == 2.0) {
        DensitySample d = laplace_density(grid);
        return {d, sample_spectrum(grid, d.model)};
    }
    SpectralDensity s = sample_spectrum(grid, linnik_model(spec.lambda));
    return {inverse_transform(s), s};
}

double mixture_weight(double s, double a, double b)
{
    if (s <= 0.0) return 0.0;
    double sa = std::pow(s, a);
    // 1 + s^2a + 2 s^a cos(t) = (1 - s^a)^2 + 4 s^a cos^2(t/2), no cancellation near s = 1
    double h = std::cos(0.5 * M_PI * a / b);
    double den = (1.0 - sa) * (1.0 - sa) + 4.0 * sa * h * h;
    return (b / M_PI) * std::sin(M_PI * a / b) * sa / s / den;
}

namespace {

constexpr double kUMax = 30.0;

// nodes s_i and weights W_i with p(x) = sum_i W_i exp(-s_i |x|), ordered by s
struct MixtureRule {
    std::vector<double> s, W;
    double lambda;
};

MixtureRule mixture_rule(double lambda, std::size_t n)
{
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
    MixtureRule r{{}, {}, lambda};
    r.s.resize(n);
    r.W.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u, w;
        gsl_integration_glfixed_point(-kUMax, kUMax, i, &u, &w, t);
        double s = std::exp(u);
        r.s[i] = s;
        // ds = s du
        r.W[i] = w * 0.5 * s * s * mixture_weight(s, lambda, 2.0);
    }
    gsl_integration_glfixed_table_free(t);
    return r;
}

double apply_rule(const MixtureRule& r, double x)
{
    double ax = std::abs(x), v = 0.0;
    for (std::size_t i = 0; i < r.s.size(); ++i) {
        double e = r.s[i] * ax;
        if (e > 745.0) break;
        v += r.W[i] * std::exp(-e);
    }
    // u > 30: g(s) ~ C s^{-lambda-1}, so the remainder is (C/2) int_S^inf s^{-lambda} e^{-s|x|} ds
    double S = std::exp(kUMax);
    double e = S * ax;
    if (e < 745.0) {
        double C = (2.0 / M_PI) * std::sin(M_PI * r.lambda / 2.0);
        v += 0.5 * C * std::pow(S, 1.0 - r.lambda) / (r.lambda - 1.0) * std::exp(-e);
    }
    return v;
}

const MixtureRule& cached_rule(double lambda, std::size_t n)
{
    thread_local std::vector<std::pair<std::pair<double, std::size_t>, std::shared_ptr<MixtureRule>>> cache;
    for (auto& c : cache)
        if (c.first.first == lambda && c.first.second == n) return *c.second;
    cache.push_back({{lambda, n}, std::make_shared<MixtureRule>(mixture_rule(lambda, n))});
    return *cache.back().second;
}

}  // namespace

double linnik_mixture_value(double lambda, double x)
{
    if (!(lambda > 1.0 && lambda < 2.0)) throw DomainError("mixture route needs lambda in (1, 2)");
    // adaptive in u = log s; g concentrates at s = 1 as lambda -> 2
    struct P {
        double lambda, ax;
    } par{lambda, std::abs(x)};
    gsl_function F;
    F.function = [](double u, void* vp) {
        auto* q = static_cast<P*>(vp);
        double s = std::exp(u);
        return 0.5 * s * s * mixture_weight(s, q->lambda, 2.0) * std::exp(-s * q->ax);
    };
    F.params = &par;
    double w = std::min(0.5, std::max(1e-8, 2.0 * (2.0 - lambda)));
    double pts[] = {-kUMax, -1.0, -w, 0.0, w, 1.0, kUMax};
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(2000);
    double v = 0.0, err = 0.0;
    int status = gsl_integration_qagp(&F, pts, 7, 0.0, 1e-11, 2000, ws, &v, &err);
    gsl_integration_workspace_free(ws);
    gsl_set_error_handler(old);
    if (status && !(status == GSL_EROUND && err < 1e-10 * std::abs(v)))
        throw NumericError("mixture quadrature did not converge");
    if (x == 0.0) {
        double C = (2.0 / M_PI) * std::sin(M_PI * lambda / 2.0);
        v += 0.5 * C * std::pow(std::exp(kUMax), 1.0 - lambda) / (lambda - 1.0);
    }
    return v;
}

DensitySample linnik_mixture_density(const StableLawSpec& spec, const Grid& grid)
{
    const double lambda = spec.lambda;
    if (!(lambda > 1.0 && lambda < 2.0)) throw DomainError("mixture route needs lambda in (1, 2)");
    const MixtureRule& fine = cached_rule(lambda, 2000);
    const MixtureRule& refined = cached_rule(lambda, 4000);
    for (double x : {0.0, grid.dx(), 1.0, 0.5 * grid.L()}) {
        double a = apply_rule(fine, x), b = apply_rule(refined, x);
        if (std::abs(a - b) > 1e-8 * std::abs(a))
            throw NumericError("mixture quadrature did not converge");
    }
    DensitySample d{grid, std::vector<double>(grid.n()), 0.0, linnik_model(lambda)};
    const std::size_t o = grid.origin();
    for (std::size_t i = 0; i < grid.n() / 2; ++i) {
        double v = apply_rule(fine, static_cast<double>(i) * grid.dx());
        d.values[o + i] = v;
        if (i > 0) d.values[o - i] = v;
    }
    d.values[0] = apply_rule(fine, grid.L());
    return d;
}

double interpolate(const std::vector<double>& values, const Grid& grid, double x)
{
    if (x < -grid.L() || x > grid.L()) throw RangeError("point outside the grid");
    double t = (x + grid.L()) / grid.dx();
    long n = static_cast<long>(grid.n());
    double r = std::round(t);
    if (std::abs(t - r) < 1e-12) return values[static_cast<std::size_t>(((static_cast<long>(r) % n) + n) % n)];
    long i0 = static_cast<long>(std::floor(t)) - 3;
    double num = 0.0, den = 0.0;
    static const double w[8] = {1, -7, 21, -35, 35, -21, 7, -1};
    for (int j = 0; j < 8; ++j) {
        long i = i0 + j;
        double c = w[j] / (t - static_cast<double>(i));
        // periodic wrap matches the grid's implicit periodicity
        num += c * values[static_cast<std::size_t>(((i % n) + n) % n)];
        den += c;
    }
    return num / den;
}

std::vector<double> default_tail_probes(const Grid& grid)
{
    return {0.25 * grid.L(), 0.5 * grid.L(), 0.75 * grid.L()};
}

TailDiagnostic tail_diagnostic(const DensitySample& f, double lambda, const std::vector<double>& probes)
{
    if (probes.empty()) throw ConfigError("tail diagnostic needs at least one probe");
    TailDiagnostic d;
    d.lambda = lambda;
    d.probes = probes;
    d.theoretical = lambda * tail_constant(lambda);
    double far = -1.0;
    for (double x : probes) {
        if (std::abs(x) > f.grid.L()) throw RangeError("tail probe outside the grid");
        double m = std::pow(std::abs(x), lambda + 1.0) * interpolate(f.values, f.grid, x);
        double e = std::abs(m / d.theoretical - 1.0);
        d.measured.push_back(m);
        d.rel_errors.push_back(e);
        if (std::abs(x) > far) {
            far = std::abs(x);
            d.measured_limit = m;
            d.rel_error = e;
        }
    }
    d.member = d.rel_error < 0.25;
    return d;
}

}  // namespace stablelab
