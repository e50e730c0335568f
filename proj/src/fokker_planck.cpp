#include "stablelab/fokker_planck.hpp"

#include <algorithm>
#include <cmath>

#include "stablelab/errors.hpp"
#include "stablelab/io.hpp"
#include "stablelab/stable_densities.hpp"

namespace stablelab {

namespace {

void check_index(double lambda)
{
    if (!(lambda > 1.0 && lambda <= 2.0)) throw DomainError("stable index must lie in (1, 2]");
}

SpectralDensity spectrum_of(const DensitySample& f)
{
    return f.model ? sample_spectrum(f.grid, f.model) : forward_transform(f);
}

}  // namespace

EvolutionSchedule::EvolutionSchedule(double lambda, std::vector<double> times)
    : lambda(lambda), times(std::move(times))
{
    check_index(lambda);
    if (this->times.empty()) throw ConfigError("empty evolution schedule");
    if (!(this->times.front() >= 0.0)) throw ConfigError("schedule times must be nonnegative");
    for (std::size_t i = 1; i < this->times.size(); ++i)
        if (!(this->times[i] > this->times[i - 1])) throw ConfigError("schedule times must increase strictly");
}

std::pair<double, double> alpha_beta(double t, double lambda)
{
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    check_index(lambda);
    return {std::exp(-t / lambda), std::pow(-std::expm1(-t), 1.0 / lambda)};
}

SpectralDensity evolve(const SpectralDensity& phi, double t, double lambda)
{
    auto [a, b] = alpha_beta(t, lambda);
    if (t == 0.0) return phi;
    SpectralDensity out = [&] {
        if (phi.model)
            return sample_spectrum(phi.grid, product(scaled(phi.model, a), scaled(levy_model(lambda), b)));
        SpectralDensity s = scale_density(phi, a);
        const double bl = -std::expm1(-t);
        for (std::size_t k = 0; k < s.values.size(); ++k)
            s.values[k] *= std::exp(-bl * std::pow(std::abs(phi.grid.xi(k)), lambda));
        return s;
    }();
    if (std::abs(out.values[0] - 1.0) > 1e-12) throw NumericError("evolution lost unit mass");
    return out;
}

DensitySample evolve_density(const DensitySample& phi, double t, double lambda)
{
    if (t == 0.0) return phi;
    return inverse_transform(evolve(spectrum_of(phi), t, lambda));
}

double evolve_semigroup_check(const SpectralDensity& phi, double t, double s, double lambda)
{
    SpectralDensity direct = evolve(phi, t + s, lambda);
    SpectralDensity twostep = evolve(evolve(phi, t, lambda), s, lambda);
    double e = 0.0;
    for (std::size_t k = 0; k < direct.values.size(); ++k)
        e = std::max(e, std::abs(direct.values[k] - twostep.values[k]));
    return e;
}

DensitySample reference_density(double lambda, const Grid& grid)
{
    check_index(lambda);
    return levy_density(StableLawSpec(lambda), grid).first;
}

Trajectory entropy_trajectory(const DensitySample& phi, const EvolutionSchedule& schedule)
{
    const double lambda = schedule.lambda;
    const SpectralDensity hat = spectrum_of(phi);
    const DensitySample omega = reference_density(lambda, phi.grid);
    auto H = [&](double t) { return relative_entropy(inverse_transform(evolve(hat, t, lambda)), omega); };
    // central difference, or the one-sided three-point rule near t = 0
    auto derivative = [&](double t, double h) {
        if (t >= h) return (H(t + h) - H(t - h)) / (2.0 * h);
        return (-3.0 * H(t) + 4.0 * H(t + h) - H(t + 2.0 * h)) / (2.0 * h);
    };

    Trajectory tr{schedule, {}, {}, {}, {}, {}};
    for (double t : schedule.times) {
        DensitySample f = inverse_transform(evolve(hat, t, lambda));
        FunctionalReport rep = functional_report(f, omega, lambda);
        const double ibar = rep.entropy_production;
        double d = derivative(t, kDerivativeStep);
        if (std::abs(d + ibar) > 1e-3 * (1.0 + ibar)) {
            double d2 = derivative(t, 0.5 * kDerivativeStep);
            d = (4.0 * d2 - d) / 3.0;
        }
        tr.densities.push_back(std::move(f));
        tr.reports.push_back(rep);
        tr.dHdt.push_back(d);
        tr.ibar.push_back(ibar);
        tr.dHdt_residuals.push_back(std::abs(d + ibar));
    }
    for (std::size_t i = 1; i < tr.reports.size(); ++i) {
        if (tr.reports[i].rel_entropy > tr.reports[i - 1].rel_entropy + kMonotoneSlack)
            throw VerificationFailure("monotonicity", "relative entropy increased between t = " +
                                                          format_number(schedule.times[i - 1]) + " and t = " +
                                                          format_number(schedule.times[i]));
    }
    return tr;
}

std::string trajectory_csv(const Trajectory& tr)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < tr.reports.size(); ++i) {
        const auto& r = tr.reports[i];
        rows.push_back({tr.schedule.times[i], r.rel_entropy, r.fisher, r.frac_fisher_lambda, tr.ibar[i],
                        tr.dHdt_residuals[i]});
    }
    return csv_string({"t", "H_rel", "I", "I_lambda", "Ibar", "dHdt_residual"}, rows);
}

InequalityCheck log_sobolev_check(const DensitySample& f, const DensitySample& omega, double lambda)
{
    check_index(lambda);
    double il = lambda < 2.0 ? fractional_relative_fisher(f, lambda) : relative_fisher(f, omega);
    if (!std::isfinite(il)) throw InapplicableInputError("relative fractional Fisher information is infinite");
    double m = std::min(fisher_information(f), fisher_information(omega));
    InequalityCheck c;
    c.lhs = relative_entropy(f, omega);
    c.rhs = lambda * std::pow(2.0, 1.0 / lambda) * std::sqrt(m) * std::sqrt(std::max(il, 0.0));
    c.pass = c.lhs <= c.rhs + 1e-6;
    return c;
}

InequalityCheck log_sobolev_check(const DensitySample& f, double lambda)
{
    return log_sobolev_check(f, reference_density(lambda, f.grid), lambda);
}

InequalityCheck classical_lsi_check(const DensitySample& f)
{
    DensitySample omega = reference_density(2.0, f.grid);
    InequalityCheck c;
    c.rhs = relative_fisher(f, omega);
    if (!std::isfinite(c.rhs)) throw InapplicableInputError("relative Fisher information is infinite");
    c.lhs = relative_entropy(f, omega);
    c.pass = c.lhs <= c.rhs + 1e-6;
    return c;
}

}  // namespace stablelab
