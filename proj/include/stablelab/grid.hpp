#pragma once

#include <cstddef>

namespace stablelab {

// Uniform grid x_j = -L + j dx on [-L, L), j = 0..n-1, with its dual
// frequency grid xi_k = k dxi in the usual DFT ordering (k >= n/2 wraps
// to k - n).
class Grid {
public:
    Grid(std::size_t n, double L);

    std::size_t n() const { return n_; }
    double L() const { return L_; }
    double dx() const { return 2.0 * L_ / static_cast<double>(n_); }
    double dxi() const;
    // full dual period n*dxi = 2 pi / dx
    double xi_period() const;
    double xi_max() const { return 0.5 * xi_period(); }

    double x(std::size_t j) const { return -L_ + static_cast<double>(j) * dx(); }
    long freq_index(std::size_t k) const
    {
        return k < n_ / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n_);
    }
    double xi(std::size_t k) const { return static_cast<double>(freq_index(k)) * dxi(); }
    // index of x = 0
    std::size_t origin() const { return n_ / 2; }
    // mirror node of j (x -> -x); node 0 at -L has no partner and maps to itself
    std::size_t mirror(std::size_t j) const { return j == 0 ? 0 : n_ - j; }

    bool operator==(const Grid& o) const { return n_ == o.n_ && L_ == o.L_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    std::size_t n_;
    double L_;
};

// throws ConfigError unless a and b are the same grid
void require_same_grid(const Grid& a, const Grid& b, const char* where);

}  // namespace stablelab
