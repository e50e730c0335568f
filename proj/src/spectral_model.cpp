#include "stablelab/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stablelab/errors.hpp"

namespace stablelab {

namespace {

constexpr double kPowerMatch = 1e-12;
// high-frequency terms smaller than this at the convergence radius are dropped
constexpr double kHighPrune = 1e-22;

bool near_integer(double v, long& k)
{
    k = std::lround(v);
    return std::abs(v - static_cast<double>(k)) < 1e-11;
}

void prune_high(Series& s, double radius)
{
    s.erase(std::remove_if(s.begin(), s.end(),
                           [radius](const Term& t) {
                               return std::abs(t.coef) * std::pow(radius, -t.power) < kHighPrune;
                           }),
            s.end());
}

void cap_low(Series& s)
{
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](const Term& t) { return t.power > kLowPowerCap + 1e-9; }),
            s.end());
}

}  // namespace

bool is_smooth(const Term& t, bool high_frequency)
{
    if (high_frequency) return false;
    long k;
    if (!near_integer(t.power, k) || k < 0) return false;
    return (t.parity == Parity::Even) ? (k % 2 == 0) : (k % 2 == 1);
}

SpectralModel::SpectralModel(Eval eval, Series low, Series high, double hf_radius, bool rapid)
    : eval_(std::move(eval)),
      low_(std::move(low)),
      high_(std::move(high)),
      hf_radius_(hf_radius),
      rapid_(rapid)
{
    if (rapid_) high_.clear();
    merge_terms(low_);
    merge_terms(high_);
}

double SpectralModel::hf_leading() const
{
    double p = std::numeric_limits<double>::infinity();
    for (const auto& t : high_) p = std::min(p, t.power);
    return p;
}

double SpectralModel::lf_leading() const
{
    double p = std::numeric_limits<double>::infinity();
    for (const auto& t : low_)
        if (!is_smooth(t)) p = std::min(p, t.power);
    return p;
}

double SpectralModel::lf_leading_coef() const
{
    double p = lf_leading();
    for (const auto& t : low_)
        if (!is_smooth(t) && t.power == p) return t.coef;
    return 0.0;
}

ModelPtr make_model(SpectralModel::Eval eval, Series low, Series high, double hf_radius, bool rapid)
{
    return std::make_shared<const SpectralModel>(std::move(eval), std::move(low), std::move(high),
                                                 hf_radius, rapid);
}

void merge_terms(Series& s)
{
    std::sort(s.begin(), s.end(), [](const Term& a, const Term& b) {
        if (a.parity != b.parity) return a.parity < b.parity;
        return a.power < b.power;
    });
    Series out;
    for (const auto& t : s) {
        if (!out.empty() && out.back().parity == t.parity &&
            std::abs(out.back().power - t.power) < kPowerMatch)
            out.back().coef += t.coef;
        else
            out.push_back(t);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coef == 0.0; }),
              out.end());
    std::sort(out.begin(), out.end(), [](const Term& a, const Term& b) { return a.power < b.power; });
    s = std::move(out);
}

Series series_product(const Series& a, const Series& b, bool high_frequency)
{
    Series out;
    out.reserve(a.size() * b.size());
    for (const auto& u : a)
        for (const auto& v : b) {
            Term t;
            t.power = u.power + v.power;
            if (!high_frequency && t.power > kLowPowerCap + 1e-9) continue;
            if (u.parity == Parity::Odd && v.parity == Parity::Odd) {
                t.parity = Parity::Even;
                t.coef = -u.coef * v.coef;
            } else {
                t.parity = (u.parity == v.parity) ? Parity::Even : Parity::Odd;
                t.coef = u.coef * v.coef;
            }
            out.push_back(t);
        }
    merge_terms(out);
    return out;
}

std::complex<double> ipow(std::complex<double> z, int n)
{
    std::complex<double> r(1.0, 0.0);
    while (n > 0) {
        if (n & 1) r *= z;
        n >>= 1;
        if (n) {
            z *= z;
            if (std::abs(z) < 1e-300) z = 0.0;
        }
    }
    if (std::abs(r) < 1e-300) r = 0.0;
    return r;
}

ModelPtr scaled(const ModelPtr& m, double a)
{
    if (!(a > 0.0)) throw DomainError("scale factor must be positive");
    if (a == 1.0) return m;
    Series low = m->low();
    for (auto& t : low) t.coef *= std::pow(a, t.power);
    Series high = m->high();
    for (auto& t : high) t.coef *= std::pow(a, -t.power);
    double r = m->hf_radius() / a;
    prune_high(high, r);
    ModelPtr base = m;
    return make_model([base, a](double xi) { return (*base)(a * xi); }, std::move(low),
                      std::move(high), r, m->rapid());
}

ModelPtr product(const ModelPtr& a, const ModelPtr& b)
{
    Series low = series_product(a->low(), b->low(), false);
    bool rapid = a->rapid() || b->rapid();
    double r = std::max(a->hf_radius(), b->hf_radius());
    Series high;
    if (!rapid) {
        high = series_product(a->high(), b->high(), true);
        prune_high(high, r);
    }
    return make_model([a, b](double xi) { return (*a)(xi) * (*b)(xi); }, std::move(low),
                      std::move(high), r, rapid);
}

ModelPtr power(const ModelPtr& m, int n)
{
    if (n < 1) throw DomainError("power requires n >= 1");
    if (n == 1) return m;
    // series by repeated squaring
    Series low_acc{{1.0, 0.0, Parity::Even}}, low_base = m->low();
    Series high_acc, high_base = m->high();
    bool high_started = false;
    double r = m->hf_radius();
    int k = n;
    while (k > 0) {
        if (k & 1) {
            low_acc = series_product(low_acc, low_base, false);
            if (!m->rapid()) {
                high_acc = high_started ? series_product(high_acc, high_base, true) : high_base;
                high_started = true;
                prune_high(high_acc, r);
            }
        }
        k >>= 1;
        if (k) {
            low_base = series_product(low_base, low_base, false);
            if (!m->rapid()) {
                high_base = series_product(high_base, high_base, true);
                prune_high(high_base, r);
            }
        }
    }
    return make_model([m, n](double xi) { return ipow((*m)(xi), n); }, std::move(low_acc),
                      std::move(high_acc), r, m->rapid());
}

namespace {

Series multiply_odd_symbol(const Series& s, double nu, bool high_frequency)
{
    Series out;
    for (const auto& t : s) {
        Term u;
        u.power = high_frequency ? t.power - nu : t.power + nu;
        if (t.parity == Parity::Even) {
            u.parity = Parity::Odd;
            u.coef = t.coef;
        } else {
            u.parity = Parity::Even;
            u.coef = -t.coef;
        }
        out.push_back(u);
    }
    return out;
}

}  // namespace

ModelPtr riesz_multiplied(const ModelPtr& m, double nu)
{
    Series low = multiply_odd_symbol(m->low(), nu, false);
    cap_low(low);
    Series high = multiply_odd_symbol(m->high(), nu, true);
    ModelPtr base = m;
    return make_model(
        [base, nu](double xi) {
            if (xi == 0.0) return std::complex<double>(0.0, 0.0);
            double s = xi > 0 ? 1.0 : -1.0;
            double mag = (nu == 1.0) ? std::abs(xi) : std::pow(std::abs(xi), nu);
            return std::complex<double>(0.0, s * mag) * (*base)(xi);
        },
        std::move(low), std::move(high), m->hf_radius(), m->rapid());
}

ModelPtr abs_power_multiplied(const ModelPtr& m, double nu)
{
    Series low = m->low();
    for (auto& t : low) t.power += nu;
    cap_low(low);
    Series high = m->high();
    for (auto& t : high) t.power -= nu;
    ModelPtr base = m;
    return make_model([base, nu](double xi) { return std::pow(std::abs(xi), nu) * (*base)(xi); },
                      std::move(low), std::move(high), m->hf_radius(), m->rapid());
}

ModelPtr linear_combination(double a, const ModelPtr& m1, double b, const ModelPtr& m2)
{
    Series low;
    for (auto t : m1->low()) { t.coef *= a; low.push_back(t); }
    for (auto t : m2->low()) { t.coef *= b; low.push_back(t); }
    Series high;
    if (!m1->rapid())
        for (auto t : m1->high()) { t.coef *= a; high.push_back(t); }
    if (!m2->rapid())
        for (auto t : m2->high()) { t.coef *= b; high.push_back(t); }
    bool rapid = m1->rapid() && m2->rapid();
    double r = std::max(m1->hf_radius(), m2->hf_radius());
    return make_model([a, m1, b, m2](double xi) { return a * (*m1)(xi) + b * (*m2)(xi); },
                      std::move(low), std::move(high), r, rapid);
}

double tail_coefficient(const Term& t)
{
    if (is_smooth(t)) return 0.0;
    double g = std::tgamma(t.power + 1.0) / M_PI;
    if (t.parity == Parity::Even) return -t.coef * g * std::sin(M_PI * t.power / 2.0);
    return -t.coef * g * std::cos(M_PI * t.power / 2.0);
}

double tail_value(const Series& low, double x)
{
    double ax = std::abs(x), s = x >= 0 ? 1.0 : -1.0, v = 0.0;
    for (const auto& t : low) {
        double B = tail_coefficient(t);
        if (B == 0.0) continue;
        double term = B * std::pow(ax, -t.power - 1.0);
        v += (t.parity == Parity::Odd) ? s * term : term;
    }
    return v;
}

double tail_derivative(const Series& low, double x)
{
    double ax = std::abs(x), s = x >= 0 ? 1.0 : -1.0, v = 0.0;
    for (const auto& t : low) {
        double B = tail_coefficient(t);
        if (B == 0.0) continue;
        double term = -(t.power + 1.0) * B * std::pow(ax, -t.power - 2.0);
        v += (t.parity == Parity::Odd) ? term : s * term;
    }
    return v;
}

}  // namespace stablelab
