#include "caerom/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>

#include "caerom/error.hpp"

namespace caerom {

SymmetricEigen symmetric_eigen(std::size_t n, std::vector<double> a, double tol) {
    if (a.size() != n * n) throw InvalidArgument("symmetric_eigen: expected an n x n matrix");
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    double total = 0.0;
    for (double x : a) total += x * x;
    const double target = tol * std::sqrt(total);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += at(i, j) * at(i, j);
        return std::sqrt(s);
    };

    constexpr int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                // Symmetric Schur rotation zeroing (p, q).
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return at(x, x) > at(y, y); });
    SymmetricEigen out;
    out.n = n;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = at(order[j], order[j]);
        for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = v[k * n + order[j]];
    }
    return out;
}

SingularSpectrum singular_values(std::size_t rows, std::size_t cols, std::span<const double> data) {
    if (rows == 0 || cols == 0) throw InvalidArgument("singular_values: empty matrix");
    if (data.size() != rows * cols) throw InvalidArgument("singular_values: data has the wrong length");
    const bool tall = rows >= cols;
    const std::size_t m = tall ? cols : rows;
    auto elem = [&](std::size_t i, std::size_t j) { return data[j * rows + i]; };

    // G = A^T A (tall) or A A^T (wide), m x m.
    std::vector<double> g(m * m, 0.0);
    const std::size_t inner = tall ? rows : cols;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < inner; ++k) {
                s += tall ? elem(k, i) * elem(k, j) : elem(i, k) * elem(j, k);
            }
            g[i * m + j] = g[j * m + i] = s;
        }
    }

    SingularSpectrum out;
    double f2 = 0.0;
    for (double v : data) f2 += v * v;
    out.frobenius = std::sqrt(f2);

    // sigma_j = |A v_j| (or |A^T v_j|) rather than sqrt(lambda_j): the root of a
    // rounded zero eigenvalue is ~1e-8 sigma_1, the norm is ~1e-16 sigma_1.
    const auto eig = symmetric_eigen(m, std::move(g));
    for (std::size_t j = 0; j < m; ++j) {
        double s2 = 0.0;
        for (std::size_t k = 0; k < inner; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                dot += (tall ? elem(k, i) : elem(i, k)) * eig.vectors[i * m + j];
            }
            s2 += dot * dot;
        }
        out.sigmas.push_back(std::sqrt(std::max(s2, 0.0)));
    }
    std::sort(out.sigmas.begin(), out.sigmas.end(), std::greater<>());
    return out;
}

SingularSpectrum singular_values(const SnapshotMatrix& a) { return singular_values(a.rows(), a.cols(), a.data()); }

double pod_projection_error(const SingularSpectrum& s, std::size_t k) {
    if (k > s.sigmas.size()) {
        throw InvalidArgument("pod_projection_error: k = " + std::to_string(k) + " exceeds the " +
                              std::to_string(s.sigmas.size()) + " singular values");
    }
    double tail = 0.0, all = 0.0;
    for (std::size_t i = 0; i < s.sigmas.size(); ++i) {
        const double v = s.sigmas[i] * s.sigmas[i];
        all += v;
        if (i >= k) tail += v;
    }
    return all == 0.0 ? 0.0 : std::sqrt(tail / all);
}

double rel_l2_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("rel_l2_error: lengths differ (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    if (den == 0.0) throw ZeroReference("rel_l2_error: reference vector has zero norm");
    return std::sqrt(num / den);
}

void write_spectrum_csv(std::ostream& out, const SingularSpectrum& s) {
    out << "index,sigma\n";
    for (std::size_t i = 0; i < s.sigmas.size(); ++i) out << i + 1 << ',' << format_real(s.sigmas[i]) << '\n';
}

void write_spectrum_csv(const std::string& path, const SingularSpectrum& s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_spectrum_csv(out, s);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace caerom
