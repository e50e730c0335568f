#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

namespace stablelab {

enum class Parity { Even, Odd };

// One power-law term of a spectrum expansion.
//   low frequency:  Even -> coef |xi|^power,  Odd -> coef i sgn(xi) |xi|^power
//   high frequency: Even -> coef |xi|^-power, Odd -> coef i sgn(xi) |xi|^-power
struct Term {
    double coef;
    double power;
    Parity parity;
};
using Series = std::vector<Term>;

// Even terms with even integer power and odd terms with odd integer power are
// polynomials in xi and contribute nothing to tails or cusps.
bool is_smooth(const Term& t, bool high_frequency = false);

// Analytic description of a spectrum: exact pointwise evaluation plus the
// power series at xi -> 0 (governs the |x| -> inf tail) and at |xi| -> inf
// (governs the behaviour at x = 0 and the aliasing of grid samples).
class SpectralModel {
public:
    using Eval = std::function<std::complex<double>(double)>;

    SpectralModel(Eval eval, Series low, Series high, double hf_radius, bool rapid);

    std::complex<double> operator()(double xi) const { return eval_(xi); }
    const Series& low() const { return low_; }
    const Series& high() const { return high_; }
    // high-frequency series converges for |xi| >= hf_radius
    double hf_radius() const { return hf_radius_; }
    // decays faster than any power; high() is empty
    bool rapid() const { return rapid_; }
    // smallest power in high(), +inf when rapid
    double hf_leading() const;
    // smallest non-smooth power in low(), +inf for light tails
    double lf_leading() const;
    // coefficient of the leading non-smooth low-frequency term (0 if none)
    double lf_leading_coef() const;

private:
    Eval eval_;
    Series low_;
    Series high_;
    double hf_radius_;
    bool rapid_;
};

using ModelPtr = std::shared_ptr<const SpectralModel>;

// truncation of products: low-frequency powers above this are dropped
inline constexpr double kLowPowerCap = 14.0;

ModelPtr make_model(SpectralModel::Eval eval, Series low, Series high, double hf_radius,
                    bool rapid);

// xi -> a xi (density of X/a ... i.e. the law of aX)
ModelPtr scaled(const ModelPtr& m, double a);
ModelPtr product(const ModelPtr& a, const ModelPtr& b);
ModelPtr power(const ModelPtr& m, int n);
// multiplier i sgn(xi) |xi|^nu, zero at xi = 0; nu = 1 is d/dx
ModelPtr riesz_multiplied(const ModelPtr& m, double nu);
// multiplier |xi|^nu (Riesz potential direction)
ModelPtr abs_power_multiplied(const ModelPtr& m, double nu);
ModelPtr linear_combination(double a, const ModelPtr& m1, double b, const ModelPtr& m2);

Series series_product(const Series& a, const Series& b, bool high_frequency);
void merge_terms(Series& s);

std::complex<double> ipow(std::complex<double> z, int n);

// x-space tail coefficient B of a low-frequency term: the inverse transform
// behaves like B|x|^{-power-1} (even) or B sgn(x)|x|^{-power-1} (odd).
double tail_coefficient(const Term& t);
// sum of tail terms at x (|x| large)
double tail_value(const Series& low, double x);
// d/dx of tail_value
double tail_derivative(const Series& low, double x);

}  // namespace stablelab
