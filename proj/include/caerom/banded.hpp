#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace caerom {

/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]` are ignored.
/// No pivoting: callers guarantee diagonal dominance. Throws NumericalFailure on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Square matrix with `kl` sub- and `ku` super-diagonals.
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    static BandedMatrix identity(std::size_t n);

    std::size_t size() const { return n_; }
    std::size_t lower_bandwidth() const { return kl_; }
    std::size_t upper_bandwidth() const { return ku_; }

    bool in_band(std::size_t i, std::size_t j) const { return j + kl_ >= i && i + ku_ >= j; }
    /// Zero outside the band.
    double at(std::size_t i, std::size_t j) const;
    /// Reference to a stored entry; throws InvalidArgument outside the band.
    double& operator()(std::size_t i, std::size_t j);

    std::vector<double> multiply(std::span<const double> x) const;
    /// this * X for a dense column-major X with n rows and `cols` columns.
    std::vector<double> multiply_dense(std::span<const double> x, std::size_t cols) const;

    std::vector<double> to_dense() const;  ///< row-major n*n

private:
    std::size_t n_, kl_, ku_;
    std::vector<double> band_;  // row i holds columns i-kl .. i+ku
};

/// LU with partial pivoting in band storage (fill grows the upper band to kl+ku).
/// Throws NumericalFailure if the matrix is singular to working precision.
std::vector<double> solve_banded(const BandedMatrix& a, std::span<const double> rhs);

}  // namespace caerom
