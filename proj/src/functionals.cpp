#include "stablelab/functionals.hpp"

#include <gsl/gsl_integration.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>

#include "stablelab/errors.hpp"

namespace stablelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSupportMassCeiling = 1e-3;

bool near_int(double v, long& k)
{
    k = std::lround(v);
    return std::abs(v - static_cast<double>(k)) < 1e-9;
}

// x-exponents e of |x|^e (or sgn |x|^e) terms at the origin carried by a field
std::vector<double> singular_exponents(const ModelPtr& m)
{
    std::vector<double> e;
    if (!m || m->rapid()) return e;
    for (const auto& t : m->high()) {
        double g = t.power - 1.0;
        long k;
        bool smooth = near_int(g, k) && k >= 0 && (k % 2 == (t.parity == Parity::Even ? 0 : 1));
        if (smooth || g >= 6.0) continue;
        if (std::none_of(e.begin(), e.end(), [&](double v) { return std::abs(v - g) < 1e-9; })) e.push_back(g);
    }
    std::sort(e.begin(), e.end());
    return e;
}

bool heavy(const ModelPtr& m)
{
    if (!m) return false;
    for (const auto& t : m->low())
        if (tail_coefficient(t) != 0.0) return true;
    return false;
}

struct Field {
    std::vector<double> v;
    std::optional<double> at0;  // value used at the origin node, none if singular there
    ModelPtr model;
    bool odd = false;
    std::vector<double> sing;

    std::vector<double> exps() const
    {
        std::vector<double> e = odd ? std::vector<double>{1, 3, 5} : std::vector<double>{0, 2, 4};
        e.insert(e.end(), sing.begin(), sing.end());
        return e;
    }
    bool has_tail() const { return heavy(model); }
    double tail(double x) const { return model ? tail_value(model->low(), x) : 0.0; }
};

Field make_field(const RealField& r)
{
    Field f;
    f.v = r.values;
    f.model = r.model;
    f.odd = r.parity == Parity::Odd;
    f.at0 = right_limit_at_origin(r);
    f.sing = singular_exponents(r.model);
    return f;
}

Field make_field(const DensitySample& d) { return make_field(d.as_field()); }

std::vector<char> make_mask(const DensitySample& f, double floor_factor)
{
    double fl = density_floor(f, floor_factor);
    std::vector<char> m(f.values.size());
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = f.values[j] >= fl && f.values[j] > 0.0;
    return m;
}

struct ExpSet {
    std::vector<double> s;
    bool divergent = false;
};

// Richardson exponents s = e + 1 for an integrand whose origin expansion is
// built from one exponent of each factor plus up to two of the density
// exponents `gammas` (division by, or logarithm of, a cusped density).
ExpSet richardson_set(const std::vector<std::vector<double>>& factors, const std::vector<double>& gammas)
{
    std::vector<double> extra{0.0};
    for (std::size_t i = 0; i < gammas.size(); ++i)
        for (std::size_t j = i; j < gammas.size(); ++j) extra.push_back(gammas[i] + gammas[j]);
    extra.insert(extra.end(), gammas.begin(), gammas.end());

    std::vector<double> sums{0.0};
    for (const auto& fac : factors) {
        std::vector<double> next;
        for (double a : sums)
            for (double b : fac) next.push_back(a + b);
        sums = std::move(next);
    }
    ExpSet r;
    std::vector<double> c;
    for (double a : sums)
        for (double b : extra) {
            double e = a + b;
            if (e <= -1.0 + 1e-12) r.divergent = true;
            long k;
            if (near_int(e, k) && k >= 0 && k % 2 == 0) continue;
            if (e >= 5.0) continue;
            c.push_back(e + 1.0);
        }
    std::sort(c.begin(), c.end());
    for (double s : c)
        if (r.s.empty() || s - r.s.back() > 1e-6) r.s.push_back(s);
    if (r.s.size() > 3) r.s.resize(3);
    return r;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

const gsl_integration_glfixed_table* gl16()
{
    static gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(16);
    return t;
}

// int_L^inf F on octave panels; +inf if the panels do not die out
double tail_panels(const std::function<double(double)>& F, double L)
{
    const gsl_integration_glfixed_table* t = gl16();
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
        double a = L * std::ldexp(1.0, k), b = 2.0 * a, P = 0.0;
        for (std::size_t i = 0; i < 16; ++i) {
            double x, w;
            gsl_integration_glfixed_point(a, b, i, &x, &w, t);
            P += w * F(x);
        }
        if (!std::isfinite(P)) return kInf;
        sum += P;
        if (k >= 2 && std::abs(P) <= 1e-16 * std::abs(sum) + 1e-22) return sum;
    }
    return kInf;
}

// relative size of the last retained asymptotic term at L, a proxy for the
// truncation error of the tail series
double tail_series_rel_error(const ModelPtr& m, double L)
{
    double lead = 0.0, last = 0.0;
    for (const auto& t : m->low()) {
        double B = tail_coefficient(t);
        if (B == 0.0) continue;
        double v = std::abs(B) * std::pow(L, -t.power - 1.0);
        if (lead == 0.0) lead = v;
        last = v;
    }
    return lead > 0.0 ? last / lead : 0.0;
}

// sum c x^e for x > 0; used to cancel the leading tail terms of score
// residuals exactly instead of in floating point
struct PowerSum {
    std::vector<std::pair<double, double>> t;  // (coef, exponent)

    static PowerSum tail_of(const ModelPtr& m)
    {
        PowerSum p;
        for (const auto& term : m->low()) {
            double B = tail_coefficient(term);
            if (B != 0.0) p.t.push_back({B, -term.power - 1.0});
        }
        return p;
    }
    PowerSum shifted(double c, double de) const
    {
        PowerSum p;
        for (auto [a, e] : t) p.t.push_back({c * a, e + de});
        return p;
    }
    PowerSum operator*(const PowerSum& o) const
    {
        PowerSum p;
        for (auto [a, e] : t)
            for (auto [b, f] : o.t) p.t.push_back({a * b, e + f});
        return p.merged();
    }
    PowerSum operator+(const PowerSum& o) const
    {
        PowerSum p = *this;
        p.t.insert(p.t.end(), o.t.begin(), o.t.end());
        return p.merged();
    }
    // combine equal exponents; sums that cancel to 1e-8 of their parts are exact zeros
    PowerSum merged() const
    {
        auto s = t;
        std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.second > b.second; });
        PowerSum p;
        for (std::size_t i = 0; i < s.size();) {
            double e = s[i].second, sum = 0.0, mag = 0.0;
            std::size_t j = i;
            for (; j < s.size() && std::abs(s[j].second - e) < 1e-9; ++j) {
                sum += s[j].first;
                mag = std::max(mag, std::abs(s[j].first));
            }
            if (std::abs(sum) > 1e-8 * mag) p.t.push_back({sum, e});
            i = j;
        }
        return p;
    }
    double operator()(double x) const
    {
        double v = 0.0;
        for (auto [a, e] : t) v += a * std::pow(x, e);
        return v;
    }
};

using Integrand = std::function<double(double x, const double* v)>;

struct Quad {
    Quad(const Grid* g, std::vector<const Field*> f, Integrand F, const std::vector<char>* m, ExpSet e, bool t)
        : grid(g), fields(std::move(f)), F(std::move(F)), mask(m), exps(std::move(e)), tail(t)
    {
    }
    const Grid* grid;
    std::vector<const Field*> fields;
    Integrand F;
    const std::vector<char>* mask = nullptr;
    ExpSet exps;
    bool tail = false;
    std::function<double(double)> tail_fn;  // replaces F on the tails when set
};

Measured integrate(const Quad& q)
{
    Measured out;
    if (q.exps.divergent) {
        out.value = kInf;
        out.divergent = true;
        return out;
    }
    const Grid& g = *q.grid;
    const std::size_t N = g.n(), o = g.origin(), nf = q.fields.size();
    std::vector<double> vals(N, 0.0), v(nf);
    for (std::size_t j = 0; j < N; ++j) {
        if (q.mask && !(*q.mask)[j]) continue;
        bool ok = true;
        for (std::size_t i = 0; i < nf; ++i) {
            if (j == o) {
                if (!q.fields[i]->at0) {
                    ok = false;
                    break;
                }
                v[i] = *q.fields[i]->at0;
            } else {
                v[i] = q.fields[i]->v[j];
            }
        }
        if (!ok) continue;
        vals[j] = q.F(g.x(j), v.data());
        if (std::isnan(vals[j])) throw NumericError("functional integrand is NaN");
    }
    out.value = quadrature_origin(vals, g, q.exps.s);
    if (q.tail) {
        auto generic = [&](double x) {
            std::vector<double> w(nf);
            for (std::size_t i = 0; i < nf; ++i) w[i] = q.fields[i]->tail(x);
            return q.F(x, w.data());
        };
        double T = q.tail_fn ? 2.0 * tail_panels(q.tail_fn, g.L()) : 2.0 * tail_panels(generic, g.L());
        out.tail = T;
        out.value += T;
        if (!std::isfinite(T)) out.divergent = true;
        double rel = 0.0;
        for (const Field* f : q.fields)
            if (f->has_tail()) rel = std::max(rel, tail_series_rel_error(f->model, g.L()));
        out.tail_error_bound = std::abs(T) * rel;
    } else {
        // untreated tail: envelope of a |x|^{-2} decay from the edge value
        out.tail_error_bound = 2.0 * g.L() * std::abs(vals[0]);
    }
    if (!std::isfinite(out.value)) {
        out.value = kInf;
        out.divergent = true;
    }
    return out;
}

double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

double excluded_mass(const DensitySample& f, const std::vector<char>& mf, const std::vector<char>& mg)
{
    double m = 0.0;
    for (std::size_t j = 0; j < mf.size(); ++j)
        if (mf[j] && !mg[j]) m += f.values[j];
    return m * f.grid.dx();
}

double tail_mass(const DensitySample& f)
{
    if (!f.model) return 0.0;
    double m = 0.0;
    for (const auto& t : f.model->low()) {
        double B = tail_coefficient(t);
        if (B != 0.0 && t.parity == Parity::Even) m += 2.0 * B * std::pow(f.grid.L(), -t.power) / t.power;
    }
    return m;
}

// analytic tail test for I_{lambda,upsilon}: the leading tail of f must be
// that of a stable law of scale upsilon, otherwise the score residual grows like x
bool frac_fisher_tail_divergent(const DensitySample& f, double lambda, double upsilon)
{
    if (!f.model) return false;
    if (!heavy(f.model)) return true;
    double p = f.model->lf_leading(), c = f.model->lf_leading_coef();
    return std::abs(p - lambda) > 1e-9 || std::abs(c + upsilon) > 1e-8 * upsilon;
}

Measured divergent_measure()
{
    Measured m;
    m.value = kInf;
    m.divergent = true;
    return m;
}

}  // namespace

Measured shannon_entropy_detail(const DensitySample& f, double floor_factor)
{
    Field F = make_field(f);
    auto mask = make_mask(f, floor_factor);
    Quad q{&f.grid, {&F}, [](double, const double* v) { return -xlogy(v[0], v[0]); }, &mask,
           richardson_set({F.exps()}, F.sing), F.has_tail()};
    Measured m = integrate(q);
    for (std::size_t j = 0; j < mask.size(); ++j)
        if (!mask[j]) m.excluded_mass += f.values[j] * f.grid.dx();
    return m;
}

Measured relative_entropy_detail(const DensitySample& f, const DensitySample& g, double floor_factor)
{
    require_same_grid(f.grid, g.grid, "relative_entropy");
    Field F = make_field(f), G = make_field(g);
    auto mf = make_mask(f, floor_factor), mg = make_mask(g, floor_factor);
    double excl = excluded_mass(f, mf, mg);
    bool tail = F.has_tail() && G.has_tail();
    if (F.has_tail() && !G.has_tail()) excl += tail_mass(f);
    if (excl >= kSupportMassCeiling)
        throw SupportMismatchError("density has mass where the reference is below the floor");
    // f log(f/g) - f + g is pointwise nonnegative; the added terms integrate to zero.
    // Nodes where only f is below the floor still carry g, so they stay in.
    std::vector<char> mask = mg;
    Quad q{&f.grid, {&F, &G},
           [](double, const double* v) {
               if (v[0] <= 0.0) return v[1];
               return v[0] * std::log(v[0] / v[1]) - v[0] + v[1];
           },
           &mask, richardson_set({merged(F.exps(), G.exps())}, merged(F.sing, G.sing)), tail};
    Measured m = integrate(q);
    m.excluded_mass = excl;
    return m;
}

Measured fisher_information_detail(const DensitySample& f, double floor_factor)
{
    Field F = make_field(f), D = make_field(classical_derivative(f));
    auto mask = make_mask(f, floor_factor);
    Quad q{&f.grid, {&F, &D}, [](double, const double* v) { return v[1] * v[1] / v[0]; }, &mask,
           richardson_set({D.exps(), D.exps()}, F.sing), F.has_tail()};
    return integrate(q);
}

Measured relative_fisher_detail(const DensitySample& f, const DensitySample& g, double floor_factor)
{
    require_same_grid(f.grid, g.grid, "relative_fisher");
    Field F = make_field(f), G = make_field(g);
    Field DF = make_field(classical_derivative(f)), DG = make_field(classical_derivative(g));
    auto mf = make_mask(f, floor_factor), mg = make_mask(g, floor_factor);
    double excl = excluded_mass(f, mf, mg);
    if (excl >= kSupportMassCeiling)
        throw SupportMismatchError("density has mass where the reference is below the floor");
    if (F.has_tail() && !G.has_tail()) return divergent_measure();
    std::vector<char> mask(mf.size());
    for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = mf[j] && mg[j];
    auto d = merged(DF.exps(), DG.exps());
    Quad q{&f.grid, {&F, &G, &DF, &DG},
           [](double, const double* v) {
               double r = v[2] / v[0] - v[3] / v[1];
               return r * r * v[0];
           },
           &mask, richardson_set({d, d}, merged(F.sing, G.sing)), F.has_tail()};
    Measured m = integrate(q);
    m.excluded_mass = excl;
    return m;
}

Measured fractional_relative_fisher_detail(const DensitySample& f, double lambda, double upsilon,
                                           double floor_factor)
{
    if (!(lambda > 1.0 && lambda < 2.0)) throw DomainError("fractional Fisher information needs lambda in (1, 2)");
    if (!(upsilon > 0.0)) throw DomainError("upsilon must be positive");
    if (frac_fisher_tail_divergent(f, lambda, upsilon)) return divergent_measure();
    Field F = make_field(f), D = make_field(stable_derivative(f, lambda));
    auto mask = make_mask(f, floor_factor);
    const double c = 1.0 / (lambda * upsilon);
    Quad q{&f.grid, {&F, &D},
           [c](double x, const double* v) {
               double r = v[1] / v[0] + c * x;
               return r * r * v[0];
           },
           &mask, richardson_set({D.exps(), D.exps()}, F.sing), F.has_tail()};
    if (q.tail) {
        PowerSum pf = PowerSum::tail_of(F.model);
        PowerSum num = PowerSum::tail_of(D.model) + pf.shifted(c, 1.0);
        q.tail_fn = [num, pf](double x) {
            double r = num(x);
            return r * r / pf(x);
        };
    }
    return integrate(q);
}

Measured fractional_relative_fisher_two_score(const DensitySample& f, const DensitySample& omega,
                                              double lambda, double floor_factor)
{
    require_same_grid(f.grid, omega.grid, "fractional_relative_fisher");
    if (!(lambda > 1.0 && lambda < 2.0)) throw DomainError("fractional Fisher information needs lambda in (1, 2)");
    if (frac_fisher_tail_divergent(f, lambda, 1.0)) return divergent_measure();
    Field F = make_field(f), W = make_field(omega);
    Field DF = make_field(stable_derivative(f, lambda)), DW = make_field(stable_derivative(omega, lambda));
    auto mf = make_mask(f, floor_factor), mw = make_mask(omega, floor_factor);
    double excl = excluded_mass(f, mf, mw);
    if (excl >= kSupportMassCeiling)
        throw SupportMismatchError("density has mass where the reference is below the floor");
    std::vector<char> mask(mf.size());
    for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = mf[j] && mw[j];
    auto d = merged(DF.exps(), DW.exps());
    Quad q{&f.grid, {&F, &W, &DF, &DW},
           [](double, const double* v) {
               double r = v[2] / v[0] - v[3] / v[1];
               return r * r * v[0];
           },
           &mask, richardson_set({d, d}, merged(F.sing, W.sing)), F.has_tail() && W.has_tail()};
    if (q.tail) {
        // (D f w - D w f)^2 / (f w^2)
        PowerSum pf = PowerSum::tail_of(F.model), pw = PowerSum::tail_of(W.model);
        PowerSum num = PowerSum::tail_of(DF.model) * pw + (PowerSum::tail_of(DW.model) * pf).shifted(-1.0, 0.0);
        q.tail_fn = [num, pf, pw](double x) {
            double r = num(x), w = pw(x);
            return r * r / (pf(x) * w * w);
        };
    }
    Measured m = integrate(q);
    m.excluded_mass = excl;
    return m;
}

Measured entropy_production_detail(const DensitySample& f, const DensitySample& omega, double lambda,
                                   double floor_factor)
{
    require_same_grid(f.grid, omega.grid, "entropy_production");
    if (!(lambda > 1.0 && lambda <= 2.0)) throw DomainError("stable index must lie in (1, 2]");
    Field F = make_field(f), W = make_field(omega);
    Field F1 = make_field(classical_derivative(f)), W1 = make_field(classical_derivative(omega));
    Field FD = make_field(stable_derivative(f, lambda)), WD = make_field(stable_derivative(omega, lambda));
    auto mf = make_mask(f, floor_factor), mw = make_mask(omega, floor_factor);
    double excl = excluded_mass(f, mf, mw);
    if (excl >= kSupportMassCeiling)
        throw SupportMismatchError("density has mass where the reference is below the floor");
    if (F.has_tail() && !W.has_tail()) return divergent_measure();
    std::vector<char> mask(mf.size());
    for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = mf[j] && mw[j];
    Quad q{&f.grid, {&F, &W, &F1, &W1, &FD, &WD},
           [](double, const double* v) {
               return v[0] * (v[2] / v[0] - v[3] / v[1]) * (v[4] / v[0] - v[5] / v[1]);
           },
           &mask,
           richardson_set({merged(F1.exps(), W1.exps()), merged(FD.exps(), WD.exps())}, merged(F.sing, W.sing)),
           F.has_tail()};
    Measured m = integrate(q);
    m.excluded_mass = excl;
    return m;
}

Measured l1_distance_detail(const DensitySample& f, const DensitySample& g)
{
    require_same_grid(f.grid, g.grid, "l1_distance");
    const Grid& grid = f.grid;
    const std::size_t N = grid.n();
    std::vector<double> d(N);
    for (std::size_t j = 0; j < N; ++j) d[j] = f.values[j] - g.values[j];
    ExpSet ex = richardson_set({merged(merged({0, 2, 4}, singular_exponents(f.model)), singular_exponents(g.model))}, {});
    // periodic trapezoid of |d| on stride-S cells; cells with a sign change use
    // the exact integral of |linear interpolant| so crossings cost O(h^3)
    auto stride_sum = [&](std::size_t S) {
        double s = 0.0;
        for (std::size_t j = 0; j < N; j += S) {
            double a = d[j], b = d[(j + S) % N];
            double aa = std::abs(a), ab = std::abs(b);
            if (a * b < 0.0)
                s += (a * a + b * b) / (2.0 * (aa + ab));
            else
                s += 0.5 * (aa + ab);
        }
        return s * grid.dx() * static_cast<double>(S);
    };
    const int K = static_cast<int>(ex.s.size());
    Eigen::MatrixXd A(K + 1, K + 1);
    Eigen::VectorXd b(K + 1);
    for (int l = 0; l <= K; ++l) {
        A(l, 0) = 1.0;
        for (int i = 0; i < K; ++i) A(l, i + 1) = std::pow(2.0, l * ex.s[i]);
        b(l) = stride_sum(std::size_t(1) << l);
    }
    Measured m;
    m.value = A.colPivHouseholderQr().solve(b)(0);
    bool tf = heavy(f.model), tg = heavy(g.model);
    if (tf || tg) {
        double T = 2.0 * tail_panels(
                             [&](double x) {
                                 double a = tf ? tail_value(f.model->low(), x) : 0.0;
                                 double c = tg ? tail_value(g.model->low(), x) : 0.0;
                                 return std::abs(a - c);
                             },
                             grid.L());
        m.tail = T;
        m.value += T;
    } else {
        m.tail_error_bound = 2.0 * grid.L() * std::abs(d[0]);
    }
    return m;
}

double shannon_entropy(const DensitySample& f) { return shannon_entropy_detail(f).value; }
double relative_entropy(const DensitySample& f, const DensitySample& g) { return relative_entropy_detail(f, g).value; }
double fisher_information(const DensitySample& f) { return fisher_information_detail(f).value; }
double relative_fisher(const DensitySample& f, const DensitySample& g) { return relative_fisher_detail(f, g).value; }
double fractional_relative_fisher(const DensitySample& f, double lambda, double upsilon)
{
    return fractional_relative_fisher_detail(f, lambda, upsilon).value;
}
double entropy_production(const DensitySample& f, const DensitySample& omega, double lambda)
{
    return entropy_production_detail(f, omega, lambda).value;
}
double l1_distance(const DensitySample& f, const DensitySample& g) { return l1_distance_detail(f, g).value; }

double tv_norm(const DensitySample& f)
{
    const auto& v = f.values;
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) s += std::abs(v[j + 1] - v[j]);
    return s + std::abs(v.front()) + std::abs(v.back());
}

namespace {

// int_0^b F on xi_j = j h, j = 0..M (M = F.size() - 1), with Richardson in
// the origin exponents s and Euler-Maclaurin end corrections from F'(b), F'''(b)
double dual_quadrature(const std::vector<double>& F, double h, const std::vector<double>& s, double d1b,
                       double d3b)
{
    const std::size_t M = F.size() - 1;
    const int K = static_cast<int>(s.size());
    Eigen::MatrixXd A(K + 1, K + 1);
    Eigen::VectorXd b(K + 1);
    for (int l = 0; l <= K; ++l) {
        std::size_t S = std::size_t(1) << l;
        double H = h * static_cast<double>(S);
        double t = 0.5 * (F[0] + F[M]);
        for (std::size_t j = S; j < M; j += S) t += F[j];
        t = H * t - H * H / 12.0 * d1b + std::pow(H, 4) / 720.0 * d3b;
        A(l, 0) = 1.0;
        for (int i = 0; i < K; ++i) A(l, i + 1) = std::pow(2.0, l * s[i]);
        b(l) = t;
    }
    return A.colPivHouseholderQr().solve(b)(0);
}

// high-frequency expansion of w |f^|^2 as sum c xi^{-q}
std::vector<std::pair<double, double>> weighted_square_hf(const ModelPtr& m, int k, bool homogeneous)
{
    std::vector<std::pair<double, double>> out;
    Series sq = series_product(m->high(), m->high(), true);
    for (const auto& t : sq) {
        if (homogeneous) {
            out.push_back({t.coef, t.power - 2.0 * k});
        } else {
            double binom = 1.0;
            for (int i = 0; i <= k; ++i) {
                out.push_back({t.coef * binom, t.power - 2.0 * i});
                binom = binom * (k - i) / (i + 1);
            }
        }
    }
    return out;
}

std::vector<double> lf_richardson(const Series& low, const std::vector<double>& shifts, int depth)
{
    std::vector<double> base;
    for (const auto& t : low)
        if (!is_smooth(t) && t.power > 0) base.push_back(t.power);
    std::vector<double> sums = base;
    if (depth >= 2)
        for (double a : base)
            for (double b : base) sums.push_back(a + b);
    std::vector<double> c;
    for (double p : sums)
        for (double sh : shifts) {
            double e = p + sh;
            long k;
            if (near_int(e, k) && k % 2 == 0) continue;
            if (e < 7.0) c.push_back(e + 1.0);
        }
    std::sort(c.begin(), c.end());
    std::vector<double> s;
    for (double v : c)
        if (s.empty() || v - s.back() > 1e-6) s.push_back(v);
    if (s.size() > 3) s.resize(3);
    return s;
}

double weight(double xi, int k, bool homogeneous)
{
    return homogeneous ? std::pow(xi * xi, k) : std::pow(1.0 + xi * xi, k);
}

double sobolev_from(const Grid& g, const std::function<double(std::size_t)>& abs2, const ModelPtr& model, int k,
                    bool homogeneous)
{
    if (k < 0 || k > 4) throw DomainError("Sobolev order must be in 0..4");
    const std::size_t M = g.n() / 2;
    const double h = g.dxi(), b = M * h;
    std::vector<double> F(M + 1);
    for (std::size_t j = 0; j <= M; ++j) F[j] = weight(j * h, k, homogeneous) * abs2(j);
    std::vector<double> s;
    double d1 = 0.0, d3 = 0.0, tail = 0.0;
    if (model) {
        std::vector<double> shifts;
        if (homogeneous)
            shifts = {2.0 * k};
        else
            for (int i = 0; i <= k; ++i) shifts.push_back(2.0 * i);
        s = lf_richardson(model->low(), shifts, 2);
    }
    if (model && !model->rapid()) {
        for (auto [c, q] : weighted_square_hf(model, k, homogeneous)) {
            if (c == 0.0) continue;
            if (q <= 1.0) return kInf;
            d1 += -q * c * std::pow(b, -q - 1.0);
            d3 += -q * (q + 1.0) * (q + 2.0) * c * std::pow(b, -q - 3.0);
            tail += c * std::pow(b, 1.0 - q) / (q - 1.0);
        }
    }
    double I = dual_quadrature(F, h, s, d1, d3) + tail;
    return std::sqrt(std::max(0.0, I / M_PI));
}

}  // namespace

double sobolev_norm(const DensitySample& f, int k, bool homogeneous)
{
    if (f.model) {
        const ModelPtr& m = f.model;
        const Grid& g = f.grid;
        return sobolev_from(g, [&](std::size_t j) { return std::norm((*m)(j * g.dxi())); }, m, k, homogeneous);
    }
    return sobolev_norm(forward_transform(f), k, homogeneous);
}

double sobolev_norm(const SpectralDensity& f, int k, bool homogeneous)
{
    const Grid& g = f.grid;
    if (f.model)
        return sobolev_from(g, [&](std::size_t j) { return std::norm((*f.model)(j * g.dxi())); }, f.model, k,
                            homogeneous);
    return sobolev_from(g, [&](std::size_t j) { return std::norm(f.values[j]); }, nullptr, k, homogeneous);
}

MomentResult moment(const DensitySample& f, double order)
{
    if (!(order >= 0.0)) throw DomainError("moment order must be nonnegative");
    if (f.model && heavy(f.model) && order >= f.model->lf_leading() - 1e-12) return {kInf, true};
    Field F = make_field(f);
    std::vector<double> fac;
    for (double e : F.exps()) fac.push_back(e + order);
    Quad q{&f.grid, {&F}, [order](double x, const double* v) { return std::pow(std::abs(x), order) * v[0]; },
           nullptr, richardson_set({fac}, {}), false};
    Measured m = integrate(q);
    if (f.model)
        for (const auto& t : f.model->low()) {
            double B = tail_coefficient(t);
            if (B != 0.0 && t.parity == Parity::Even)
                m.value += 2.0 * B * std::pow(f.grid.L(), order - t.power) / (t.power - order);
        }
    return {m.value, false};
}

Con23Result con23_checker(const SpectralDensity& f, double M, int k)
{
    if (!(M > 0.0)) throw DomainError("exponent M must be positive");
    if (k < 0) throw DomainError("Sobolev order must be nonnegative");
    const Grid& g = f.grid;
    const std::size_t half = g.n() / 2;
    const double h = g.dxi(), b = half * h;
    auto integrand = [&](double xi, double absf) { return std::pow(absf, M) * std::pow(1.0 + xi * xi, k); };
    std::vector<double> F(half + 1);
    for (std::size_t j = 0; j <= half; ++j)
        F[j] = integrand(j * h, f.model ? std::abs((*f.model)(j * h)) : std::abs(f.values[j]));
    std::vector<double> s;
    if (f.model && !f.model->rapid()) {
        std::vector<double> shifts;
        for (int i = 0; i <= std::min(k, 3); ++i) shifts.push_back(2.0 * i);
        s = lf_richardson(f.model->low(), shifts, 2);
    }
    double grid_part = dual_quadrature(F, h, s, 0.0, 0.0);
    Con23Result r{0.0, false, 1.0};
    if (!f.model) {
        // octave increments inside the grid only
        auto partial = [&](std::size_t upto) {
            double t = 0.5 * (F[0] + F[upto]);
            for (std::size_t j = 1; j < upto; ++j) t += F[j];
            return t * h;
        };
        double P0 = partial(half) - partial(half / 2), P1 = partial(half / 2) - partial(half / 4);
        r.ratio = P1 > 0.0 ? P0 / P1 : 0.0;
        r.value = 2.0 * grid_part;
        double rem = r.ratio < 1.0 ? P0 * r.ratio / (1.0 - r.ratio) : kInf;
        r.converged = r.ratio < std::pow(2.0, -0.05) && rem < 1e-3 * grid_part;
        return r;
    }
    const gsl_integration_glfixed_table* t = gl16();
    double sum = grid_part, prev = 0.0;
    for (int j = 0; j < 60; ++j) {
        double a = b * std::ldexp(1.0, j), c = 2.0 * a, P = 0.0;
        for (std::size_t i = 0; i < 16; ++i) {
            double xi, w;
            gsl_integration_glfixed_point(a, c, i, &xi, &w, t);
            P += w * integrand(xi, std::abs((*f.model)(xi)));
        }
        sum += P;
        if (j > 0) r.ratio = prev > 0.0 ? P / prev : 0.0;
        prev = P;
        if (!std::isfinite(sum)) break;
        if (P <= 1e-16 * sum) {
            r.converged = true;
            break;
        }
    }
    if (!r.converged && std::isfinite(sum)) {
        double rem = r.ratio < 1.0 ? prev * r.ratio / (1.0 - r.ratio) : kInf;
        r.converged = r.ratio < std::pow(2.0, -0.05) && rem < 1e-3 * sum;
    }
    r.value = 2.0 * sum;
    return r;
}

std::string FunctionalReport::to_json() const
{
    nlohmann::ordered_json j;
    j["shannon"] = shannon;
    j["rel_entropy"] = rel_entropy;
    j["fisher"] = fisher;
    j["rel_fisher"] = rel_fisher;
    j["frac_fisher_lambda"] = frac_fisher_lambda;
    j["entropy_production"] = entropy_production;
    j["tv"] = tv;
    for (int k = 0; k < 5; ++k) j["sobolev_k" + std::to_string(k)] = sobolev[k];
    j["l1"] = l1;
    j["masked_fraction"] = masked_fraction;
    j["tail_error_bound"] = tail_error_bound;
    return j.dump();
}

FunctionalReport functional_report(const DensitySample& f, const DensitySample& omega, double lambda)
{
    if (!(lambda > 1.0 && lambda <= 2.0)) throw DomainError("stable index must lie in (1, 2]");
    FunctionalReport r;
    double bound = 0.0;
    auto take = [&](const Measured& m) {
        bound += m.tail_error_bound;
        return m.value;
    };
    r.shannon = take(shannon_entropy_detail(f));
    r.rel_entropy = take(relative_entropy_detail(f, omega));
    r.fisher = take(fisher_information_detail(f));
    r.rel_fisher = take(relative_fisher_detail(f, omega));
    // at lambda = 2 the fractional score is the classical one against the variance-2 Gaussian
    r.frac_fisher_lambda = lambda < 2.0 ? take(fractional_relative_fisher_detail(f, lambda)) : r.rel_fisher;
    r.entropy_production = take(entropy_production_detail(f, omega, lambda));
    r.tv = tv_norm(f);
    for (int k = 0; k < 5; ++k) r.sobolev[k] = sobolev_norm(f, k, true);
    r.l1 = take(l1_distance_detail(f, omega));
    r.masked_fraction = 0.0;
    auto mask = make_mask(f, kFloorFactor);
    for (char c : mask) r.masked_fraction += c ? 0.0 : 1.0;
    r.masked_fraction /= static_cast<double>(mask.size());
    r.tail_error_bound = bound;
    return r;
}

}  // namespace stablelab
