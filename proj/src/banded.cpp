#include "caerom/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "caerom/error.hpp"

namespace caerom {

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0) {
        throw InvalidArgument("solve_tridiagonal: inconsistent sizes");
    }
    std::vector<double> c(n), d(n), x(n);
    double m = diag[0];
    if (m == 0.0) throw NumericalFailure("solve_tridiagonal: zero pivot at row 0");
    c[0] = upper[0] / m;
    d[0] = rhs[0] / m;
    for (std::size_t i = 1; i < n; ++i) {
        m = diag[i] - lower[i] * c[i - 1];
        if (m == 0.0 || !std::isfinite(m)) {
            throw NumericalFailure("solve_tridiagonal: zero pivot at row " + std::to_string(i));
        }
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), band_(n * (kl + ku + 1), 0.0) {
    if (n == 0) throw InvalidArgument("BandedMatrix: empty");
}

BandedMatrix BandedMatrix::identity(std::size_t n) {
    BandedMatrix m(n, 0, 0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double BandedMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_ || !in_band(i, j)) return 0.0;
    return band_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

double& BandedMatrix::operator()(std::size_t i, std::size_t j) {
    if (i >= n_ || j >= n_ || !in_band(i, j)) {
        throw InvalidArgument("BandedMatrix: (" + std::to_string(i) + "," + std::to_string(j) + ") outside band");
    }
    return band_[i * (kl_ + ku_ + 1) + (j + kl_ - i)];
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
    return multiply_dense(x, 1);
}

std::vector<double> BandedMatrix::multiply_dense(std::span<const double> x, std::size_t cols) const {
    if (x.size() != n_ * cols) throw InvalidArgument("BandedMatrix::multiply: size mismatch");
    std::vector<double> y(n_ * cols, 0.0);
    const std::size_t w = kl_ + ku_ + 1;
    for (std::size_t c = 0; c < cols; ++c) {
        const double* xc = x.data() + c * n_;
        double* yc = y.data() + c * n_;
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j0 = i >= kl_ ? i - kl_ : 0;
            const std::size_t j1 = std::min(n_ - 1, i + ku_);
            const double* row = band_.data() + i * w;
            double s = 0.0;
            for (std::size_t j = j0; j <= j1; ++j) s += row[j + kl_ - i] * xc[j];
            yc[i] = s;
        }
    }
    return y;
}

std::vector<double> BandedMatrix::to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) d[i * n_ + j] = at(i, j);
    return d;
}

std::vector<double> solve_banded(const BandedMatrix& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != n) throw InvalidArgument("solve_banded: rhs size mismatch");
    const std::size_t kl = a.lower_bandwidth();
    const std::size_t ku = a.upper_bandwidth();
    const std::size_t ku_fill = kl + ku;
    const std::size_t w = kl + ku_fill + 1;
    // Row i stores columns i-kl .. i+kl+ku.
    std::vector<double> lu(n * w, 0.0);
    auto el = [&](std::size_t i, std::size_t j) -> double& { return lu[i * w + (j + kl - i)]; };
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = i >= kl ? i - kl : 0;
        const std::size_t j1 = std::min(n - 1, i + ku);
        for (std::size_t j = j0; j <= j1; ++j) {
            el(i, j) = a.at(i, j);
            scale = std::max(scale, std::abs(a.at(i, j)));
        }
    }
    std::vector<double> b(rhs.begin(), rhs.end());
    const double tiny = scale * static_cast<double>(n) * std::numeric_limits<double>::epsilon();

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t last = std::min(n - 1, k + kl);
        std::size_t piv = k;
        for (std::size_t i = k + 1; i <= last; ++i)
            if (std::abs(el(i, k)) > std::abs(el(piv, k))) piv = i;
        if (!(std::abs(el(piv, k)) > tiny)) {
            throw NumericalFailure("solve_banded: singular matrix at column " + std::to_string(k));
        }
        const std::size_t jmax = std::min(n - 1, k + ku_fill);
        if (piv != k) {
            for (std::size_t j = k; j <= jmax; ++j) std::swap(el(k, j), el(piv, j));
            std::swap(b[k], b[piv]);
        }
        const double p = el(k, k);
        for (std::size_t i = k + 1; i <= last; ++i) {
            const double f = el(i, k) / p;
            if (f == 0.0) continue;
            el(i, k) = 0.0;
            for (std::size_t j = k + 1; j <= jmax; ++j) el(i, j) -= f * el(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t jmax = std::min(n - 1, i + ku_fill);
        double s = b[i];
        for (std::size_t j = i + 1; j <= jmax; ++j) s -= el(i, j) * x[j];
        x[i] = s / el(i, i);
    }
    return x;
}

}  // namespace caerom
