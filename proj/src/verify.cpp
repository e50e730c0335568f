#include "stablelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>

#include "stablelab/clt_cascade.hpp"
#include "stablelab/errors.hpp"
#include "stablelab/io.hpp"
#include "stablelab/stable_densities.hpp"

namespace stablelab {

namespace {

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

DensitySample strip(DensitySample d)
{
    d.model.reset();
    return d;
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

std::string lambda_tag(double lambda)
{
    std::string s = format_number(lambda);
    return "lambda" + s;
}

class Collector {
public:
    Collector(const VerifyOptions& opt) : opt_(opt) {}

    double tol(const std::string& name) const
    {
        auto it = opt_.tolerances.find(name);
        if (it != opt_.tolerances.end()) return it->second;
        return default_tolerances().at(name);
    }

    void add(const std::string& category, const std::string& name, double lambda, double at, double measured,
             double bound, double slack)
    {
        checks.push_back({category, name, lambda, at, measured, bound, slack, measured <= bound + slack});
    }

    // error-style check: measured error against a named tolerance
    void error(const std::string& category, const std::string& name, double lambda, double at, double err)
    {
        add(category, name, lambda, at, err, tol(name), 0.0);
    }

    void flag(const std::string& category, const std::string& name, double lambda, double at, bool ok)
    {
        add(category, name, lambda, at, ok ? 0.0 : 1.0, 0.0, 0.0);
    }

    // re-slack the checks of a sweep with the configured tolerances
    void sweep(const std::string& prefix, const SweepResult& s,
               const std::function<void(const RatioCheck&, std::string&, double&, double&)>& map)
    {
        for (const auto& c : s.ratio_checks) {
            std::string category;
            double bound = c.bound, slack = c.slack;
            map(c, category, bound, slack);
            add(category, prefix + "." + c.name, s.lambda, c.n, c.measured, bound, slack);
        }
    }

    void write(const std::string& name, const std::string& text)
    {
        if (opt_.out.empty()) return;
        write_text(opt_.out / name, text);
        files.push_back(name);
    }

    std::vector<VerifyCheck> checks;
    std::vector<std::string> files;

private:
    const VerifyOptions& opt_;
};

void transform_checks(Collector& c, const Grid& g)
{
    {
        DensitySample d = strip(gaussian_density(2.0, g));
        SpectralDensity F = forward_transform(d);
        double e = 0.0;
        for (std::size_t k = 0; k < g.n(); ++k) e = std::max(e, std::abs(F.values[k] - std::exp(-g.xi(k) * g.xi(k))));
        c.error("transform", "transform.gaussian", kNone, kNone, e);
    }
    {
        DensitySample d = inverse_transform(sample_spectrum(g, levy_model(1.0)));
        double e = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j) {
            double x = g.x(j);
            if (std::abs(x) > 20.0) continue;
            e = std::max(e, std::abs(d.values[j] * M_PI * (1.0 + x * x) - 1.0));
        }
        c.error("transform", "transform.cauchy", kNone, kNone, e);
    }
    {
        DensitySample d = inverse_transform(sample_spectrum(g, linnik_model(2.0)));
        double e = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j) e = std::max(e, std::abs(d.values[j] - 0.5 * std::exp(-std::abs(g.x(j)))));
        c.error("transform", "transform.laplace", kNone, kNone, e);
    }
    std::vector<DensitySample> corpus{gaussian_density(1.0, g), laplace_density(g),
                                      linnik_density_fourier(StableLawSpec(1.2), g).first,
                                      levy_density(StableLawSpec(1.5), g).first};
    double e = 0.0;
    for (const auto& d : corpus) e = std::max(e, max_abs(inverse_transform(forward_transform(strip(d))).values, d.values));
    c.error("transform", "transform.round_trip", kNone, kNone, e);
}

void golden_checks(Collector& c, const Grid& g)
{
    c.error("golden", "golden.shannon_gaussian", kNone, 1.0,
            std::abs(shannon_entropy(gaussian_density(1.0, g)) - 0.5 * std::log(2.0 * M_PI * M_E)));
    for (double sigma : {0.5, 1.0, 2.0})
        c.error("golden", "golden.fisher_gaussian", kNone, sigma,
                std::abs(fisher_information(gaussian_density(sigma, g)) - 1.0 / sigma));
    c.error("golden", "golden.shannon_laplace", kNone, kNone,
            std::abs(shannon_entropy(laplace_density(g)) - (1.0 + std::log(2.0))));
}

void lambda2_checks(Collector& c, const VerifyOptions& opt)
{
    const Grid& g = opt.grid;
    Trajectory tr = entropy_trajectory(gaussian_density(1.0, g), EvolutionSchedule(2.0, opt.times));
    for (std::size_t i = 0; i < opt.times.size(); ++i)
        c.error("entropy_production", "entropy_production.lambda2", 2.0, opt.times[i], tr.dHdt_residuals[i]);
    c.write("trajectory_lambda2_gaussian.csv", trajectory_csv(tr));

    InequalityCheck l = classical_lsi_check(gaussian_density(1.0, g));
    c.add("flow", "flow.classical_lsi_gaussian", 2.0, kNone, l.lhs, l.rhs, c.tol("lsi"));
    c.error("flow", "flow.classical_lsi_gaussian_closed_form", 2.0, kNone,
            std::max(std::abs(l.lhs - (0.5 * std::log(2.0) - 0.25)), std::abs(l.rhs - 0.25)));
    InequalityCheck lap = classical_lsi_check(laplace_density(g));
    c.add("flow", "flow.classical_lsi_laplace", 2.0, kNone, lap.lhs, lap.rhs, c.tol("lsi"));
}

void per_lambda(Collector& c, const VerifyOptions& opt, double lambda)
{
    const Grid& g = opt.grid;
    const double e = (2.0 - lambda) / lambda;
    auto [omega, omega_hat] = levy_density(StableLawSpec(lambda), g);
    auto [phi, phi_hat] = linnik_density_fourier(StableLawSpec(lambda), g);

    // score identity on |x| <= 20
    {
        RealField d = riesz_derivative(omega, FractionalOrder(lambda - 1.0));
        double err = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j)
            if (std::abs(g.x(j)) <= 20.0) err = std::max(err, std::abs(d.values[j] + g.x(j) / lambda * omega.values[j]));
        c.error("score", "score.identity", lambda, kNone, err);
    }
    c.error("golden", "golden.frac_fisher_stable", lambda, kNone, std::abs(fractional_relative_fisher(omega, lambda)));

    // Blachman-Stam and the smoothing form
    const double i_phi = fractional_relative_fisher(phi, lambda);
    for (double eps : {0.1, 0.5, 0.9}) {
        InequalityCheck b = blachman_stam_check(phi_hat, phi_hat, eps, lambda);
        c.add("blachman_stam", "blachman_stam.linnik", lambda, eps, b.lhs, b.rhs, c.tol("blachman_stam"));
        InequalityCheck s = blachman_stam_check(omega_hat, phi_hat, eps, lambda);
        c.add("blachman_stam", "blachman_stam.smoothing", lambda, eps, s.lhs, std::pow(1.0 - eps, 2.0 / lambda) * i_phi,
              c.tol("blachman_stam"));
    }

    CascadeSpec spec(phi_hat, lambda, opt.n_max);
    SweepResult fs = fisher_monotonicity_sweep(spec, false);
    c.sweep("fisher_sweep", fs, [&](const RatioCheck& r, std::string& cat, double& bound, double& slack) {
        cat = "fisher_monotonicity";
        if (r.name == "monotone") slack = c.tol("fisher.monotone");
        if (r.name == "step_ratio" || r.name == "cumulative_rate") slack = bound * c.tol("fisher.step_rel") + 1e-10;
        if (r.name == "rate_fit") bound = -e + c.tol("rate_margin");
    });

    // log-Sobolev on the corpus
    const double i_omega = fisher_information(omega);
    auto lsi = [&](const std::string& name, const DensitySample& f, double at) {
        InequalityCheck l = log_sobolev_check(f, omega, lambda);
        c.add("log_sobolev", "log_sobolev." + name, lambda, at, l.lhs, l.rhs, c.tol("lsi"));
        return l;
    };
    lsi("linnik", phi, kNone);
    InequalityCheck eq = lsi("stable", omega, kNone);
    c.error("log_sobolev", "log_sobolev.equality", lambda, kNone, std::max(std::abs(eq.lhs), std::abs(eq.rhs)));
    for (double t : {0.25, 1.0}) lsi("evolved_linnik", evolve_density(phi, t, lambda), t);

    // trajectory
    std::vector<double> ts{0.0};
    for (double t : opt.times)
        if (t > 0.0) ts.push_back(t);
    // a monotonicity violation throws; it is recorded as a failed check
    std::optional<Trajectory> traj;
    try {
        traj = entropy_trajectory(phi, EvolutionSchedule(lambda, ts));
    } catch (const VerificationFailure&) {
    }
    c.flag("flow", "flow.trajectory_monotone", lambda, kNone, traj.has_value());
    const Trajectory tr = traj.value_or(Trajectory{EvolutionSchedule(lambda, ts), {}, {}, {}, {}, {}});
    for (std::size_t i = 0; i < tr.reports.size(); ++i) {
        const double t = ts[i];
        const auto& r = tr.reports[i];
        if (t >= 0.05)
            c.add("entropy_production", "entropy_production.identity", lambda, t, tr.dHdt_residuals[i], 0.0,
                  c.tol("entropy_production.rel") * (1.0 + tr.ibar[i]));
        auto [a, b] = alpha_beta(t, lambda);
        c.add("flow", "flow.smoothing", lambda, t, r.frac_fisher_lambda, a * a * tr.reports[0].frac_fisher_lambda, 1e-6);
        if (t > 0.0) {
            double i_phi_c = tr.reports[0].fisher;
            c.add("flow", "flow.fisher_bound", lambda, t, r.fisher, std::min(i_phi_c / (a * a), i_omega / (b * b)), 1e-4);
        }
        double rhs = lambda * std::pow(2.0, 1.0 / lambda) * std::sqrt(std::min(r.fisher, i_omega)) *
                     std::sqrt(std::max(r.frac_fisher_lambda, 0.0));
        c.add("log_sobolev", "log_sobolev.trajectory", lambda, t, r.rel_entropy, rhs, c.tol("lsi"));
    }
    if (!tr.reports.empty()) c.write("trajectory_" + lambda_tag(lambda) + ".csv", trajectory_csv(tr));

    c.error("flow", "flow.stationarity", lambda, kNone, [&] {
        double m = 0.0;
        for (double t : {0.1, 1.0, 10.0}) {
            SpectralDensity s = evolve(omega_hat, t, lambda);
            for (std::size_t k = 0; k < g.n(); ++k) m = std::max(m, std::abs(s.values[k] - omega_hat.values[k]));
        }
        return m;
    }());
    c.error("flow", "flow.semigroup", lambda, kNone, evolve_semigroup_check(phi_hat, 0.3, 0.7, lambda));
    c.error("flow", "flow.long_time_l1", lambda, 20.0, l1_distance(evolve_density(phi, 20.0, lambda), omega));

    // entropy decay
    SweepResult es = entropy_decay_sweep(spec, false);
    c.sweep("entropy_sweep", es, [&](const RatioCheck& r, std::string& cat, double& bound, double& slack) {
        cat = r.name == "log_sobolev_chain" ? "log_sobolev" : "entropy_decay";
        if (r.name == "log_sobolev_chain") slack = c.tol("lsi");
        if (r.name == "monotone") slack = c.tol("entropy_decay.monotone");
        if (r.name == "rate_fit") bound = -e / 2.0 + c.tol("rate_margin");
    });

    // Sobolev machinery
    for (int k = 0; k <= 3; ++k) {
        double above = 2.0 * (k + 1) / lambda + 0.1, below = (2.0 * k + 1.0) / lambda - 0.1;
        c.flag("sobolev", "sobolev.con23_above", lambda, k, con23_checker(phi_hat, above, k).converged);
        c.flag("sobolev", "sobolev.con23_below", lambda, k, !con23_checker(phi_hat, below, k).converged);
    }
    for (int k = 0; k <= 2; ++k) {
        SobolevSweep ss = sobolev_convergence_sweep(spec, k, false);
        c.sweep("sobolev_sweep_k" + std::to_string(k), ss.sweep,
                [&](const RatioCheck& r, std::string& cat, double& bound, double& slack) {
                    cat = "sobolev";
                    if (r.name == "uniform_bound") bound = 1.0 + c.tol("sobolev.uniform");
                    if (r.name == "interpolation") slack = c.tol("sobolev.interpolation");
                });
    }

    // full sweep with the data file
    SweepResult cs = cascade_sweep(spec, default_sweep_n(opt.n_max));
    c.sweep("cascade", cs, [&](const RatioCheck& r, std::string& cat, double& bound, double& slack) {
        if (r.name == "cumulative_rate" || r.name == "monotone") {
            cat = "fisher_monotonicity";
            slack = r.name == "monotone" ? c.tol("fisher.monotone") : bound * c.tol("fisher.step_rel") + 1e-10;
        } else if (r.name == "log_sobolev_chain") {
            cat = "log_sobolev";
            slack = c.tol("lsi");
        } else if (r.name == "csiszar_kullback") {
            cat = "entropy_decay";
        } else {
            cat = "uniform_fisher";
        }
    });
    c.write("sweep_" + lambda_tag(lambda) + ".csv", sweep_csv(cs));
    c.write("sweep_" + lambda_tag(lambda) + ".json", sweep_summary_json(cs));
    InequalityCheck tvf = tv_fisher_bound_check(phi);
    c.add("uniform_fisher", "uniform_fisher.three_fold", lambda, kNone, tvf.lhs, tvf.rhs, 1e-6);
}

}  // namespace

const std::vector<CheckCategory>& check_categories()
{
    static const std::vector<CheckCategory> c{
        {"transform", 10},          {"score", 11},         {"golden", 12},
        {"blachman_stam", 13},      {"fisher_monotonicity", 14}, {"log_sobolev", 15},
        {"entropy_production", 16}, {"entropy_decay", 17}, {"sobolev", 18},
        {"uniform_fisher", 19},     {"flow", 20},
    };
    return c;
}

int category_exit_code(const std::string& category)
{
    for (const auto& c : check_categories())
        if (category == c.name) return c.exit_code;
    return kExitInternal;
}

const std::map<std::string, double>& default_tolerances()
{
    static const std::map<std::string, double> t{
        {"transform.gaussian", 1e-9},
        {"transform.cauchy", 1e-6},
        {"transform.laplace", 1e-6},
        {"transform.round_trip", 1e-10},
        {"score.identity", 1e-5},
        {"golden.shannon_gaussian", 1e-6},
        {"golden.fisher_gaussian", 1e-6},
        {"golden.shannon_laplace", 1e-5},
        {"golden.frac_fisher_stable", 1e-5},
        {"blachman_stam", 1e-5},
        {"fisher.monotone", 1e-7},
        {"fisher.step_rel", 1e-4},
        {"rate_margin", 0.05},
        {"lsi", 1e-6},
        {"log_sobolev.equality", 1e-4},
        {"entropy_production.rel", 1e-3},
        {"entropy_production.lambda2", 1e-4},
        {"entropy_decay.monotone", 1e-6},
        {"sobolev.uniform", 0.02},
        {"sobolev.interpolation", 1e-6},
        {"flow.stationarity", 1e-10},
        {"flow.semigroup", 1e-9},
        {"flow.long_time_l1", 1e-4},
        {"flow.classical_lsi_gaussian_closed_form", 1e-8},
    };
    return t;
}

bool VerifyReport::all_pass() const { return first_failure() == nullptr; }

const VerifyCheck* VerifyReport::first_failure() const
{
    for (const auto& c : checks)
        if (!c.pass) return &c;
    return nullptr;
}

int VerifyReport::exit_code() const
{
    const VerifyCheck* f = first_failure();
    return f ? category_exit_code(f->category) : kExitOk;
}

std::string VerifyReport::to_json() const
{
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["all_pass"] = all_pass();
    j["exit_code"] = exit_code();
    const VerifyCheck* f = first_failure();
    j["first_failure"] = f ? nlohmann::ordered_json(f->category + ":" + f->name) : nlohmann::ordered_json();
    auto& cats = j["categories"] = nlohmann::ordered_json::object();
    for (const auto& cat : check_categories()) {
        int n = 0, failed = 0;
        for (const auto& c : checks)
            if (c.category == cat.name) {
                ++n;
                failed += c.pass ? 0 : 1;
            }
        cats[cat.name] = {{"exit_code", cat.exit_code}, {"checks", n}, {"failed", failed}, {"pass", failed == 0}};
    }
    auto& arr = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        arr.push_back({{"category", c.category},
                       {"name", c.name},
                       {"lambda", num(c.lambda)},
                       {"at", num(c.at)},
                       {"measured", num(c.measured)},
                       {"bound", num(c.bound)},
                       {"slack", num(c.slack)},
                       {"pass", c.pass}});
    j["data_files"] = data_files;
    return j.dump(2) + "\n";
}

VerifyReport verify_all(const VerifyOptions& opt)
{
    for (const auto& [k, v] : opt.tolerances)
        if (!default_tolerances().count(k)) throw ConfigError("unknown tolerance '" + k + "'");
    for (double l : opt.lambdas)
        if (!(l > 1.0 && l < 2.0)) throw ConfigError("verify-all lambdas must lie in (1, 2)");
    if (opt.n_max < 8) throw ConfigError("verify-all needs n_max >= 8");

    Collector c(opt);
    transform_checks(c, opt.grid);
    golden_checks(c, opt.grid);
    lambda2_checks(c, opt);
    for (double l : opt.lambdas) per_lambda(c, opt, l);

    VerifyReport r;
    // stable order by category, then by evaluation order
    const auto& cats = check_categories();
    auto rank = [&](const std::string& name) {
        for (std::size_t i = 0; i < cats.size(); ++i)
            if (name == cats[i].name) return i;
        return cats.size();
    };
    r.checks = c.checks;
    std::stable_sort(r.checks.begin(), r.checks.end(),
                     [&](const VerifyCheck& a, const VerifyCheck& b) { return rank(a.category) < rank(b.category); });
    r.data_files = c.files;
    return r;
}

}  // namespace stablelab
