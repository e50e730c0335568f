#include "stablelab/spectral_core.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "stablelab/errors.hpp"

namespace stablelab {

Grid::Grid(std::size_t n, double L) : n_(n), L_(L)
{
    if (n < 1024 || (n & (n - 1)) != 0)
        throw ConfigError("grid size must be a power of two >= 1024");
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid half-extent must be positive");
}

double Grid::dxi() const { return M_PI / L_; }
double Grid::xi_period() const { return static_cast<double>(n_) * dxi(); }

void require_same_grid(const Grid& a, const Grid& b, const char* where)
{
    if (a != b) throw ConfigError(std::string(where) + ": grid mismatch");
}

namespace {

// FFTW planning is not thread safe; plans are made once per (n, sign) and
// executed on caller arrays with the new-array interface.
fftw_plan plan_for(std::size_t n, int sign)
{
    static std::mutex mu;
    static std::map<std::pair<std::size_t, int>, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    fftw_complex* a = fftw_alloc_complex(n);
    fftw_complex* b = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    plans.emplace(key, p);
    return p;
}

std::vector<cplx> fft(const std::vector<cplx>& in, int sign)
{
    std::vector<cplx> out(in.size());
    std::vector<cplx> tmp(in);
    fftw_execute_dft(plan_for(in.size(), sign), reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

// Chebyshev interpolant on q in [-1/2, 1/2]
class ChebFit {
public:
    static constexpr int K = 32;
    template <class F>
    explicit ChebFit(F&& f)
    {
        std::array<double, K> v;
        for (int j = 0; j < K; ++j) v[j] = f(0.5 * std::cos(M_PI * (j + 0.5) / K));
        for (int k = 0; k < K; ++k) {
            double s = 0.0;
            for (int j = 0; j < K; ++j) s += v[j] * std::cos(M_PI * k * (j + 0.5) / K);
            c_[k] = 2.0 * s / K;
        }
        c_[0] *= 0.5;
    }
    double operator()(double q) const
    {
        double t = 2.0 * q, b1 = 0.0, b2 = 0.0;
        for (int k = K - 1; k >= 1; --k) {
            double b0 = 2.0 * t * b1 - b2 + c_[k];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c_[0];
    }

private:
    std::array<double, K> c_{};
};

// h(m) = (m+q)^-p +- (m-q)^-p and its derivatives in m
double pair_term(double p, double q, double m, int r, double sign)
{
    double c = 1.0;
    for (int i = 0; i < r; ++i) c *= -(p + i);
    return c * (std::pow(m + q, -p - r) + sign * std::pow(m - q, -p - r));
}

std::vector<cplx> alias_correction(const Grid& grid, const SpectralModel& model)
{
    const std::size_t N = grid.n();
    const double Xi = grid.xi_period();
    std::vector<cplx> A(N, cplx(0.0, 0.0));
    std::vector<double> xi(N);
    for (std::size_t k = 0; k < N; ++k) xi[k] = grid.xi(k);

    auto direct = [&](long m) {
        double mx = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            cplx v = model(xi[k] + m * Xi) + model(xi[k] - m * Xi);
            A[k] += v;
            mx = std::max(mx, std::abs(v));
        }
        return mx;
    };

    if (model.rapid()) {
        double scale = std::max(std::abs(model(0.0)), 1e-300);
        for (long m = 1;; ++m) {
            if (m > 512) throw NumericError("alias sum of rapidly decaying spectrum did not converge");
            if (direct(m) < 1e-20 * scale) break;
        }
        return A;
    }
    long m0 = std::max(1L, static_cast<long>(std::ceil(model.hf_radius() / Xi + 0.5)));
    if (m0 > 4096) throw NumericError("high-frequency expansion starts beyond the alias range");
    for (long m = 1; m < m0; ++m) direct(m);
    for (const auto& t : model.high()) {
        if (t.parity == Parity::Even && t.power <= 1.0)
            throw NumericError("spectrum decays too slowly for alias summation");
        if (t.power <= 0.0) throw NumericError("non-decaying odd spectrum term");
        double amp = t.coef * std::pow(Xi, -t.power);
        if (std::abs(amp) * 4.0 < 1e-22) continue;
        ChebFit fit([&](double q) { return pair_sum(t.power, q, t.parity, m0); });
        for (std::size_t k = 0; k < N; ++k) {
            double v = amp * fit(xi[k] / Xi);
            A[k] += (t.parity == Parity::Even) ? cplx(v, 0.0) : cplx(0.0, v);
        }
    }
    return A;
}

std::vector<double> image_correction(const Grid& grid, const SpectralModel& model)
{
    const std::size_t N = grid.n();
    const double P = 2.0 * grid.L();
    std::vector<double> img(N, 0.0);
    for (const auto& t : model.low()) {
        double B = tail_coefficient(t);
        if (B == 0.0) continue;
        double e = t.power + 1.0;
        double amp = B * std::pow(P, -e);
        if (std::abs(amp) * 4.0 < 1e-22) continue;
        ChebFit fit([&](double q) { return pair_sum(e, q, t.parity, 1); });
        for (std::size_t j = 0; j < N; ++j) img[j] += amp * fit(grid.x(j) / P);
    }
    return img;
}

std::vector<double> real_part_checked(const std::vector<cplx>& g, double* imag_residue)
{
    std::vector<double> out(g.size());
    double im = 0.0, re = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        out[j] = g[j].real();
        im = std::max(im, std::abs(g[j].imag()));
        re = std::max(re, std::abs(g[j].real()));
    }
    double rel = im / std::max(1.0, re);
    if (imag_residue) *imag_residue = rel;
    if (rel > 1e-6) throw SymmetryError("imaginary residue after inverse transform: Hermitian symmetry violated");
    return out;
}

std::vector<double> plain_inverse(const Grid& grid, const std::vector<cplx>& F, double* imag_residue)
{
    const std::size_t N = grid.n();
    if (F.size() != N) throw ConfigError("spectrum length does not match grid");
    std::vector<cplx> G(N);
    for (std::size_t k = 0; k < N; ++k) G[k] = (k & 1) ? -F[k] : F[k];
    auto g = fft(G, FFTW_BACKWARD);
    double s = grid.dxi() / (2.0 * M_PI);
    for (auto& v : g) v *= s;
    return real_part_checked(g, imag_residue);
}

std::vector<cplx> plain_forward(const Grid& grid, const std::vector<double>& f)
{
    const std::size_t N = grid.n();
    if (f.size() != N) throw ConfigError("sample length does not match grid");
    std::vector<cplx> in(f.begin(), f.end());
    auto F = fft(in, FFTW_FORWARD);
    for (std::size_t k = 0; k < N; ++k) F[k] *= (k & 1) ? -grid.dx() : grid.dx();
    return F;
}

void check_finite(const std::vector<double>& v)
{
    for (double x : v)
        if (!std::isfinite(x)) throw NumericError("non-finite value in samples");
}

}  // namespace

double pair_sum(double p, double q, Parity parity, long m0)
{
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    const long M = m0 + 12;
    double s = 0.0;
    for (long m = m0; m < M; ++m) s += pair_term(p, q, static_cast<double>(m), 0, sign);
    const double Md = static_cast<double>(M);
    double integral;
    if (parity == Parity::Even) {
        if (p <= 1.0) throw NumericError("even pair sum diverges for p <= 1");
        integral = (std::pow(Md + q, 1.0 - p) + std::pow(Md - q, 1.0 - p)) / (p - 1.0);
    } else if (std::abs(p - 1.0) < 1e-14) {
        integral = std::log((Md - q) / (Md + q));
    } else {
        integral = (std::pow(Md + q, 1.0 - p) - std::pow(Md - q, 1.0 - p)) / (p - 1.0);
    }
    // Euler-Maclaurin tail, B_2 .. B_12
    static const double B[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730};
    double em = integral + 0.5 * pair_term(p, q, Md, 0, sign);
    double fact = 1.0;
    for (int j = 1; j <= 6; ++j) {
        fact *= (2.0 * j - 1) * (2.0 * j);
        em -= B[j - 1] / fact * pair_term(p, q, Md, 2 * j - 1, sign);
    }
    return s + em;
}

std::vector<double> origin_exponents(const ModelPtr& model, std::size_t max_count)
{
    std::vector<double> e;
    if (!model || model->rapid()) return e;
    for (const auto& t : model->high()) {
        double g = t.power - 1.0;
        long k = std::lround(g);
        bool smooth = std::abs(g - k) < 1e-11 && k >= 0 && (k % 2 == (t.parity == Parity::Even ? 0 : 1));
        if (smooth || t.power > 6.0) continue;
        if (std::find_if(e.begin(), e.end(), [&](double v) { return std::abs(v - t.power) < 1e-9; }) == e.end())
            e.push_back(t.power);
    }
    std::sort(e.begin(), e.end());
    if (e.size() > max_count) e.resize(max_count);
    return e;
}

double DensitySample::trapezoid_mass() const { return quadrature(values, grid); }

double DensitySample::mass() const
{
    double m = quadrature_origin(values, grid, origin_exponents(model));
    if (model)
        for (const auto& t : model->low()) {
            double B = tail_coefficient(t);
            if (B != 0.0 && t.parity == Parity::Even) m += 2.0 * B * std::pow(grid.L(), -t.power) / t.power;
        }
    return m;
}

void DensitySample::validate(double mass_tol) const
{
    if (values.size() != grid.n()) throw ConfigError("density length does not match grid");
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0) throw NumericError("density samples must be finite and nonnegative");
    if (clamped_mass >= kClampCeiling) throw NumericError("clamped negative mass exceeds ceiling");
    double m = mass();
    if (std::abs(m - 1.0) > mass_tol) throw NumericError("density mass outside tolerance");
}

void SpectralDensity::validate(double tol) const
{
    if (values.size() != grid.n()) throw ConfigError("spectrum length does not match grid");
    if (std::abs(values[0] - 1.0) > tol) throw NumericError("spectrum is not 1 at xi = 0");
    const std::size_t N = grid.n();
    for (std::size_t k = 1; k < N; ++k) {
        if (std::abs(values[k]) > 1.0 + 1e-9) throw NumericError("characteristic function exceeds 1");
        if (k != N / 2 && std::abs(values[k] - std::conj(values[N - k])) > tol)
            throw SymmetryError("spectrum is not Hermitian");
    }
}

SpectralDensity sample_spectrum(const Grid& grid, const ModelPtr& model)
{
    SpectralDensity s{grid, std::vector<cplx>(grid.n()), model};
    for (std::size_t k = 0; k < grid.n(); ++k) s.values[k] = (*model)(grid.xi(k));
    return s;
}

std::vector<double> synthesize(const Grid& grid, const ModelPtr& model, double* imag_residue)
{
    const std::size_t N = grid.n();
    std::vector<cplx> F(N);
    for (std::size_t k = 0; k < N; ++k) F[k] = (*model)(grid.xi(k));
    auto A = alias_correction(grid, *model);
    for (std::size_t k = 0; k < N; ++k) F[k] += A[k];
    auto g = plain_inverse(grid, F, imag_residue);
    auto img = image_correction(grid, *model);
    for (std::size_t j = 0; j < N; ++j) g[j] -= img[j];
    return g;
}

SpectralDensity forward_transform(const RealField& f)
{
    check_finite(f.values);
    if (!f.model) return SpectralDensity{f.grid, plain_forward(f.grid, f.values), nullptr};
    std::vector<double> v = f.values;
    auto img = image_correction(f.grid, *f.model);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += img[j];
    auto F = plain_forward(f.grid, v);
    auto A = alias_correction(f.grid, *f.model);
    for (std::size_t k = 0; k < F.size(); ++k) F[k] -= A[k];
    return SpectralDensity{f.grid, std::move(F), f.model};
}

SpectralDensity forward_transform(const DensitySample& f)
{
    if (f.values.size() != f.grid.n()) throw ConfigError("density length does not match grid");
    return forward_transform(f.as_field());
}

RealField inverse_transform_field(const SpectralDensity& g, Parity parity)
{
    RealField out{g.grid, {}, g.model, parity};
    out.values = g.model ? synthesize(g.grid, g.model) : plain_inverse(g.grid, g.values, nullptr);
    return out;
}

DensitySample inverse_transform(const SpectralDensity& g)
{
    DensitySample d{g.grid, {}, 0.0, g.model};
    d.values = g.model ? synthesize(g.grid, g.model) : plain_inverse(g.grid, g.values, nullptr);
    double neg = 0.0;
    for (auto& v : d.values)
        if (v < 0.0) {
            neg -= v;
            v = 0.0;
        }
    d.clamped_mass = neg * g.grid.dx();
    if (d.clamped_mass >= kClampCeiling)
        throw NumericError("negative ringing above the clamping ceiling; refine the grid");
    return d;
}

SpectralDensity convolve(const SpectralDensity& f, const SpectralDensity& g)
{
    require_same_grid(f.grid, g.grid, "convolve");
    SpectralDensity out{f.grid, std::vector<cplx>(f.grid.n()), nullptr};
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = f.values[k] * g.values[k];
    if (f.model && g.model) out.model = product(f.model, g.model);
    return out;
}

SpectralDensity scale_density(const SpectralDensity& f, double a)
{
    if (!(a > 0.0)) throw DomainError("scale factor must be positive");
    if (a == 1.0) return f;
    if (f.model) return sample_spectrum(f.grid, scaled(f.model, a));

    const std::size_t N = f.grid.n();
    const long half = static_cast<long>(N / 2);
    auto at = [&](long i) { return f.values[static_cast<std::size_t>(i < 0 ? i + static_cast<long>(N) : i)]; };
    double edge = 0.0;
    for (long i = half - half / 8; i < half; ++i) edge = std::max({edge, std::abs(at(i)), std::abs(at(-i))});
    const bool negligible_edge = edge < 1e-15 * std::abs(f.values[0]);

    static const double w[8] = {1, -7, 21, -35, 35, -21, 7, -1};
    SpectralDensity out{f.grid, std::vector<cplx>(N), nullptr};
    for (std::size_t k = 0; k < N; ++k) {
        double t = a * static_cast<double>(f.grid.freq_index(k));
        if (t < -half || t > half - 1) {
            if (!negligible_edge) throw RangeError("scaled frequencies exceed the dual grid");
            out.values[k] = 0.0;
            continue;
        }
        double r = std::round(t);
        if (std::abs(t - r) < 1e-12) {
            out.values[k] = at(static_cast<long>(r));
            continue;
        }
        long i0 = static_cast<long>(std::floor(t)) - 3;
        // keep the stencil on one side of the kink at xi = 0
        if (t > 0) i0 = std::max(i0, 0L);
        if (t < 0) i0 = std::min(i0, -7L);
        i0 = std::clamp(i0, -half, half - 8);
        cplx num = 0.0;
        double den = 0.0;
        for (int j = 0; j < 8; ++j) {
            double c = w[j] / (t - static_cast<double>(i0 + j));
            num += c * at(i0 + j);
            den += c;
        }
        out.values[k] = num / den;
    }
    out.values[0] = f.values[0];
    return out;
}

double quadrature(const std::vector<double>& values, const Grid& grid)
{
    if (values.size() != grid.n()) throw ConfigError("quadrature: length does not match grid");
    double s = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericError("quadrature: non-finite integrand");
        s += v;
    }
    return s * grid.dx();
}

double quadrature_origin(const std::vector<double>& values, const Grid& grid,
                         const std::vector<double>& exponents)
{
    double I0 = quadrature(values, grid);
    const int K = static_cast<int>(exponents.size());
    if (K == 0) return I0;
    std::vector<double> I(K + 1);
    I[0] = I0;
    for (int l = 1; l <= K; ++l) {
        std::size_t stride = std::size_t(1) << l;
        double s = 0.0;
        for (std::size_t j = 0; j < values.size(); j += stride) s += values[j];
        I[l] = s * grid.dx() * static_cast<double>(stride);
    }
    Eigen::MatrixXd A(K + 1, K + 1);
    Eigen::VectorXd b(K + 1);
    for (int l = 0; l <= K; ++l) {
        A(l, 0) = 1.0;
        for (int i = 0; i < K; ++i) A(l, i + 1) = std::pow(2.0, l * exponents[i]);
        b(l) = I[l];
    }
    return A.colPivHouseholderQr().solve(b)(0);
}

std::optional<double> right_limit_at_origin(const RealField& f)
{
    const double node = f.values[f.grid.origin()];
    if (!f.model || f.model->rapid()) return node;
    double jump = 0.0;
    for (const auto& t : f.model->high()) {
        if (t.parity == Parity::Even && t.power <= 1.0 + 1e-12) return std::nullopt;
        if (t.parity == Parity::Odd) {
            if (t.power < 1.0 - 1e-12) return std::nullopt;
            if (std::abs(t.power - 1.0) <= 1e-12) jump += -0.5 * t.coef;
        }
    }
    return node + jump;
}

}  // namespace stablelab
